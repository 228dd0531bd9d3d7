//! Frequency-domain channel metrics: 3 dB bandwidth, RMS delay spread and
//! bandwidth CDFs over a channel database.
//!
//! The 3 dB bandwidth is defined on the magnitude of the Fourier transform of
//! the binned optical-power impulse response: the lowest frequency at which
//! `20 log10(|H(f)| / |H(0)|)` reaches -3 dB, located by linear interpolation
//! between frequency samples. Responses whose magnitude never drops 3 dB
//! below DC within the representable band report the Nyquist frequency with
//! the `nyquist_capped` flag set.

use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};
use crate::propagation::{ChannelDb, ChannelRecord, ImpulseResponse};

/// Zero-padding floor for bandwidth searches; 2^16 samples at 10 ps binning
/// give a frequency resolution of ~1.5 MHz.
const MIN_FFT_SIZE: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthResult {
    pub f3db_hz: f64,
    /// Set when the magnitude response never falls 3 dB below DC within the
    /// representable band; `f3db_hz` then equals the Nyquist frequency.
    pub nyquist_capped: bool,
}

/// Discrete Fourier transform of the binned power impulse response.
/// `H(0)` equals the DC gain.
pub fn frequency_response(ir: &ImpulseResponse, n_fft: usize) -> Result<Vec<Complex<f64>>> {
    if !n_fft.is_power_of_two() {
        return Err(Error::Analysis(format!(
            "FFT size {n_fft} is not a power of two"
        )));
    }
    if n_fft < ir.bins.len() {
        return Err(Error::Analysis(format!(
            "FFT size {n_fft} smaller than the {}-bin response",
            ir.bins.len()
        )));
    }
    let mut buf: Vec<Complex<f64>> = ir
        .bins
        .iter()
        .map(|&b| Complex::new(b, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(n_fft)
        .collect();
    FftPlanner::new().plan_fft_forward(n_fft).process(&mut buf);
    Ok(buf)
}

/// Lowest frequency at which the magnitude response is 3 dB below DC.
pub fn bandwidth_3db(ir: &ImpulseResponse) -> Result<BandwidthResult> {
    let dc = ir.dc_gain();
    if dc.is_nan() || dc <= 0.0 {
        return Err(Error::Analysis(
            "bandwidth undefined for an all-zero impulse response".into(),
        ));
    }
    let n_fft = MIN_FFT_SIZE.max(ir.bins.len().next_power_of_two());
    let spectrum = frequency_response(ir, n_fft)?;
    let h0 = spectrum[0].norm();
    let df = 1.0 / (n_fft as f64 * ir.dt_s);
    let mut prev_db = 0.0;
    for (k, value) in spectrum.iter().enumerate().take(n_fft / 2 + 1).skip(1) {
        let db = 20.0 * (value.norm() / h0).log10();
        if db <= -3.0 {
            let f_prev = (k - 1) as f64 * df;
            let frac = (-3.0 - prev_db) / (db - prev_db);
            return Ok(BandwidthResult {
                f3db_hz: f_prev + frac * df,
                nyquist_capped: false,
            });
        }
        prev_db = db;
    }
    Ok(BandwidthResult {
        f3db_hz: 0.5 / ir.dt_s,
        nyquist_capped: true,
    })
}

/// RMS delay spread of the binned response:
/// `sqrt(sum(h t^2)/sum(h) - (sum(h t)/sum(h))^2)`.
pub fn rms_delay_spread(ir: &ImpulseResponse) -> Result<f64> {
    let dc = ir.dc_gain();
    if dc.is_nan() || dc <= 0.0 {
        return Err(Error::Analysis(
            "delay spread undefined for an all-zero impulse response".into(),
        ));
    }
    let mut first = 0.0;
    let mut second = 0.0;
    for (k, &h) in ir.bins.iter().enumerate() {
        let t = ir.bin_time(k);
        first += h * t;
        second += h * t * t;
    }
    let mean = first / dc;
    Ok((second / dc - mean * mean).max(0.0).sqrt())
}

/// Empirical distribution of per-location channel bandwidths.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfCurve {
    /// Sorted bandwidth samples, Hz.
    pub values: Vec<f64>,
    /// Cumulative probabilities; the last entry is 1.
    pub probabilities: Vec<f64>,
}

impl CdfCurve {
    pub fn from_samples(mut samples: Vec<f64>) -> Result<CdfCurve> {
        if samples.is_empty() {
            return Err(Error::Analysis("no samples for CDF".into()));
        }
        samples.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
        let n = samples.len() as f64;
        let probabilities = (1..=samples.len()).map(|i| i as f64 / n).collect();
        Ok(CdfCurve {
            values: samples,
            probabilities,
        })
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }
}

/// One bandwidth sample per location: the 3 dB bandwidth of the record with
/// the highest DC gain over all access points and receiver elements at that
/// location.
pub fn bandwidth_cdf(db: &ChannelDb) -> Result<CdfCurve> {
    if db.records.is_empty() {
        return Err(Error::Analysis("empty channel database".into()));
    }
    let samples = db
        .locations
        .par_iter()
        .map(|loc| {
            let best = db.best_record_for_location(loc.id)?;
            if best.dc_gain.is_nan() || best.dc_gain <= 0.0 {
                return Err(Error::Analysis(format!(
                    "location {} receives no power from any access point",
                    loc.id
                )));
            }
            Ok(bandwidth_3db(&best.ir)?.f3db_hz)
        })
        .collect::<Result<Vec<f64>>>()?;
    CdfCurve::from_samples(samples)
}

/// Bandwidth of every record with nonzero gain, in database key order:
/// (location id, access point id, element id, result).
pub fn per_record_bandwidth(db: &ChannelDb) -> Result<Vec<(u32, u32, u32, BandwidthResult)>> {
    db.records
        .par_iter()
        .filter(|r| r.dc_gain > 0.0)
        .map(|r: &ChannelRecord| {
            Ok((
                r.location_id,
                r.ap_id,
                r.element_id,
                bandwidth_3db(&r.ir)?,
            ))
        })
        .collect()
}
