//! Deterministic ray-traced propagation: geometric impulse responses and DC
//! gains from every access point to every receiver element.
//!
//! Paths are traced directly (line of sight), via one bounce off the fine
//! reflector grid, and via two bounces off the coarse reflector grid. Every
//! surface patch re-emits collected power as an order-1 Lambertian source
//! scaled by its reflectance; each path deposits its power in the delay bin
//! of its total propagation time. The coarse patch-to-patch transfer kernel
//! is precomputed once per scene and shared across access points and
//! receiver locations.
//!
//! Impulse responses are stored per (location, access point, receiver
//! element) and are wavelength independent: surface reflectances carry no
//! spectral dependence, so per-wavelength received power is the stored
//! geometric gain times the transmitted power downstream.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::receivers::ReceiverSpec;
use crate::scene::{
    discretize_surfaces, AccessPoint, ReflectingElement, SceneConfig, TransmitSpec,
};

pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

/// Binning and truncation parameters of traced impulse responses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Histogram bin width, s. The default 10 ps gives a 50 GHz Nyquist rate.
    pub dt_s: f64,
    /// Impulse responses are truncated at this delay, s.
    pub max_time_s: f64,
    /// Highest reflection order traced (0, 1 or 2).
    pub max_order: u8,
}

impl Default for ChannelParams {
    fn default() -> Self {
        ChannelParams {
            dt_s: 10e-12,
            max_time_s: 60e-9,
            max_order: 2,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if self.dt_s.is_nan()
            || self.dt_s <= 0.0
            || self.max_time_s.is_nan()
            || self.max_time_s <= self.dt_s
        {
            return Err(Error::Channel(format!(
                "invalid binning: dt {} s, max time {} s",
                self.dt_s, self.max_time_s
            )));
        }
        if self.max_order > 2 {
            return Err(Error::Channel(format!(
                "reflection order {} not supported (max 2)",
                self.max_order
            )));
        }
        Ok(())
    }

    pub fn n_bins(&self) -> usize {
        (self.max_time_s / self.dt_s).ceil() as usize
    }

    /// Highest representable frequency of the binned response, Hz.
    pub fn nyquist_hz(&self) -> f64 {
        0.5 / self.dt_s
    }
}

/// Radiant intensity of an order-n Lambertian emitter at angle `psi` off
/// axis, per unit emitted power: `(n+1)/(2 pi) cos^n(psi)` for `psi < pi/2`,
/// zero behind the emitter plane.
pub fn lambertian_intensity(order: f64, psi_rad: f64) -> f64 {
    radiant_intensity_cos(order, psi_rad.cos())
}

#[inline]
fn radiant_intensity_cos(order: f64, cos_psi: f64) -> f64 {
    if cos_psi <= 0.0 {
        return 0.0;
    }
    let c = if order == 1.0 {
        cos_psi
    } else {
        cos_psi.powf(order)
    };
    (order + 1.0) / (2.0 * std::f64::consts::PI) * c
}

/// A point Lambertian emitter.
#[derive(Debug, Clone, Copy)]
pub struct PointSource {
    pub position: Vec3,
    /// Unit emission axis.
    pub orientation: Vec3,
    pub lambertian_order: f64,
}

impl PointSource {
    pub fn from_access_point(ap: &AccessPoint) -> PointSource {
        PointSource {
            position: ap.position,
            orientation: ap.orientation,
            lambertian_order: ap.lambertian_order,
        }
    }
}

/// A flat detector with a conical field of view around its normal.
#[derive(Debug, Clone, Copy)]
pub struct Collector {
    pub position: Vec3,
    /// Unit normal of the detector plane.
    pub normal: Vec3,
    pub area_m2: f64,
    pub fov_semi_angle_rad: f64,
}

/// Line-of-sight channel gain between a point source and a collector:
/// `(n+1) A cos^n(phi) cos(theta) / (2 pi d^2)`, zero when the collector is
/// behind the emitter plane or the ray falls outside the collector FOV.
pub fn los_gain(tx: &PointSource, rx: &Collector) -> f64 {
    let w = rx.position - tx.position;
    let d2 = w.norm_squared();
    if d2 <= 0.0 {
        return 0.0;
    }
    let d = d2.sqrt();
    let u = w / d;
    let cos_emit = tx.orientation.dot(u);
    if cos_emit <= 0.0 {
        return 0.0;
    }
    let cos_inc = rx.normal.dot(-u);
    if cos_inc + 1e-15 < rx.fov_semi_angle_rad.cos() || cos_inc <= 0.0 {
        return 0.0;
    }
    radiant_intensity_cos(tx.lambertian_order, cos_emit) * cos_inc * rx.area_m2 / d2
}

/// Power transferred per unit power re-emitted by `from` onto the patch `to`
/// (both treated as Lambertian re-emitters/collectors). Satisfies the
/// reciprocity relation `gain(a, b) / area(b) == gain(b, a) / area(a)`.
pub fn element_to_element_gain(from: &ReflectingElement, to: &ReflectingElement) -> f64 {
    let w = to.centre - from.centre;
    let d2 = w.norm_squared();
    if d2 <= 0.0 {
        return 0.0;
    }
    let d = d2.sqrt();
    let u = w / d;
    let cos_emit = from.normal.dot(u);
    if cos_emit <= 0.0 {
        return 0.0;
    }
    let cos_inc = -to.normal.dot(u);
    if cos_inc <= 0.0 {
        return 0.0;
    }
    radiant_intensity_cos(from.lambertian_order, cos_emit) * cos_inc * to.area_m2 / d2
}

/// Binned power impulse response for unit transmitted power.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponse {
    /// Bin width, s.
    pub dt_s: f64,
    /// Time of the first stored bin, s.
    pub t0_s: f64,
    /// Dimensionless gain per bin; never negative, trailing zeros trimmed.
    pub bins: Vec<f64>,
}

impl ImpulseResponse {
    /// Builds a response from a dense delay histogram starting at t = 0,
    /// trimming leading and trailing zero bins.
    pub fn from_dense(dt_s: f64, dense: &[f64]) -> ImpulseResponse {
        let first = dense.iter().position(|&v| v != 0.0);
        match first {
            None => ImpulseResponse {
                dt_s,
                t0_s: 0.0,
                bins: Vec::new(),
            },
            Some(first) => {
                let last = dense.iter().rposition(|&v| v != 0.0).unwrap();
                ImpulseResponse {
                    dt_s,
                    t0_s: first as f64 * dt_s,
                    bins: dense[first..=last].to_vec(),
                }
            }
        }
    }

    /// Sum of all bins (the fraction of transmitted power received).
    pub fn dc_gain(&self) -> f64 {
        self.bins.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// Time of bin `k` (left edge), s.
    pub fn bin_time(&self, k: usize) -> f64 {
        self.t0_s + k as f64 * self.dt_s
    }
}

/// Traced channel between one access point and one receiver element at one
/// location.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRecord {
    pub location_id: u32,
    pub ap_id: u32,
    /// 1-based branch (1..=4) or pixel (1..=9) index.
    pub element_id: u32,
    pub ir: ImpulseResponse,
    /// Received power split by path order: [line of sight, one bounce, two bounces].
    pub gain_by_order: [f64; 3],
    /// Sum of all impulse-response bins.
    pub dc_gain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbLocation {
    pub id: u32,
    pub position: Vec3,
}

/// Precalculated channel database over (location, access point, element).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDb {
    pub scene_hash: [u8; 32],
    pub receiver: ReceiverSpec,
    pub params: ChannelParams,
    pub transmit: Vec<TransmitSpec>,
    pub access_points: Vec<AccessPoint>,
    pub locations: Vec<DbLocation>,
    /// Complete over the key cross-product, ordered by
    /// (location, access point, element).
    pub records: Vec<ChannelRecord>,
}

impl ChannelDb {
    pub fn n_elements(&self) -> usize {
        self.receiver.element_count()
    }

    fn location_index(&self, location_id: u32) -> Result<usize> {
        self.locations
            .iter()
            .position(|l| l.id == location_id)
            .ok_or_else(|| Error::Channel(format!("unknown location id {location_id}")))
    }

    fn ap_index(&self, ap_id: u32) -> Result<usize> {
        self.access_points
            .iter()
            .position(|a| a.id == ap_id)
            .ok_or_else(|| Error::Channel(format!("unknown access point id {ap_id}")))
    }

    pub fn record(&self, location_id: u32, ap_id: u32, element_id: u32) -> Result<&ChannelRecord> {
        let ne = self.n_elements() as u32;
        if element_id == 0 || element_id > ne {
            return Err(Error::Channel(format!(
                "element id {element_id} outside 1..={ne}"
            )));
        }
        let li = self.location_index(location_id)?;
        let ai = self.ap_index(ap_id)?;
        let idx = (li * self.access_points.len() + ai) * ne as usize + (element_id as usize - 1);
        let rec = &self.records[idx];
        debug_assert_eq!(
            (rec.location_id, rec.ap_id, rec.element_id),
            (location_id, ap_id, element_id)
        );
        Ok(rec)
    }

    pub fn records_for_location(&self, location_id: u32) -> Result<&[ChannelRecord]> {
        let li = self.location_index(location_id)?;
        let per_loc = self.access_points.len() * self.n_elements();
        Ok(&self.records[li * per_loc..(li + 1) * per_loc])
    }

    /// Record with the highest DC gain at a location (ties resolve to the
    /// lowest (access point, element) key).
    pub fn best_record_for_location(&self, location_id: u32) -> Result<&ChannelRecord> {
        let records = self.records_for_location(location_id)?;
        records
            .iter()
            .reduce(|best, r| if r.dc_gain > best.dc_gain { r } else { best })
            .ok_or_else(|| Error::Channel("empty channel database".into()))
    }

    /// Total transmitted power of one access point at one wavelength, W.
    pub fn tx_power_w(&self, ap_id: u32, wl: crate::scene::Wavelength) -> Result<f64> {
        let ap = &self.access_points[self.ap_index(ap_id)?];
        let spec = self.transmit_spec(wl)?;
        Ok(spec.power_per_module_w * ap.n_ld_modules as f64)
    }

    pub fn responsivity_a_per_w(&self, wl: crate::scene::Wavelength) -> Result<f64> {
        Ok(self.transmit_spec(wl)?.responsivity_a_per_w)
    }

    fn transmit_spec(&self, wl: crate::scene::Wavelength) -> Result<&TransmitSpec> {
        self.transmit
            .iter()
            .find(|t| t.wavelength == wl)
            .ok_or_else(|| Error::Channel(format!("wavelength {wl} not in database")))
    }

    /// Checks completeness and ordering of the record cross-product.
    pub fn validate(&self) -> Result<()> {
        let expected = self.locations.len() * self.access_points.len() * self.n_elements();
        if self.records.len() != expected {
            return Err(Error::DbFormat(format!(
                "expected {expected} records, found {}",
                self.records.len()
            )));
        }
        let mut it = self.records.iter();
        for loc in &self.locations {
            for ap in &self.access_points {
                for e in 1..=self.n_elements() as u32 {
                    let rec = it.next().unwrap();
                    if (rec.location_id, rec.ap_id, rec.element_id) != (loc.id, ap.id, e) {
                        return Err(Error::DbFormat(format!(
                            "record out of order at ({}, {}, {})",
                            rec.location_id, rec.ap_id, rec.element_id
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Coarse patch-to-patch transfer kernel, row-major from emitter i to
/// collector j. Gains and distances are stored in f32: the kernel is the
/// largest allocation of a build and per-entry relative error stays below
/// 1e-7, far inside the model tolerances.
struct Kernel {
    n: usize,
    gain: Vec<f32>,
    dist: Vec<f32>,
}

impl Kernel {
    fn build(elements: &[ReflectingElement]) -> Kernel {
        let n = elements.len();
        let mut gain = vec![0f32; n * n];
        let mut dist = vec![0f32; n * n];
        gain.par_chunks_mut(n)
            .zip(dist.par_chunks_mut(n))
            .enumerate()
            .for_each(|(i, (gain_row, dist_row))| {
                let from = &elements[i];
                for (j, to) in elements.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    let g = element_to_element_gain(from, to);
                    if g > 0.0 {
                        gain_row[j] = g as f32;
                        dist_row[j] = from.centre.distance(to.centre) as f32;
                    }
                }
            });
        Kernel { n, gain, dist }
    }
}

/// Anything that turns an arriving ray into per-element collection areas.
/// `arrival` points from the receiver towards the source.
pub(crate) trait Acceptance {
    fn element_count(&self) -> usize;
    fn for_each(&self, arrival: Vec3, f: impl FnMut(usize, f64));
}

impl Acceptance for ReceiverSpec {
    fn element_count(&self) -> usize {
        ReceiverSpec::element_count(self)
    }
    fn for_each(&self, arrival: Vec3, f: impl FnMut(usize, f64)) {
        self.for_each_acceptance(arrival, f)
    }
}

impl Acceptance for Collector {
    fn element_count(&self) -> usize {
        1
    }
    fn for_each(&self, arrival: Vec3, mut f: impl FnMut(usize, f64)) {
        let cos_inc = self.normal.dot(arrival);
        if cos_inc > 0.0 && cos_inc + 1e-15 >= self.fov_semi_angle_rad.cos() {
            f(0, self.area_m2 * cos_inc);
        }
    }
}

struct ElementTrace {
    bins: Vec<f64>,
    gain_by_order: [f64; 3],
}

/// Shared tracing state for one scene: discretized reflector grids and the
/// coarse double-bounce kernel. Immutable after construction; trace calls
/// may run concurrently.
pub struct Tracer {
    params: ChannelParams,
    fine: Vec<ReflectingElement>,
    coarse: Vec<ReflectingElement>,
    kernel: Option<Kernel>,
}

impl Tracer {
    pub fn new(scene: &SceneConfig, params: ChannelParams) -> Result<Tracer> {
        params.validate()?;
        let fine = if params.max_order >= 1 {
            discretize_surfaces(scene, scene.element_size_order1_m)?
        } else {
            Vec::new()
        };
        let (coarse, kernel) = if params.max_order >= 2 {
            let coarse = discretize_surfaces(scene, scene.element_size_order2_m)?;
            let kernel = Kernel::build(&coarse);
            (coarse, Some(kernel))
        } else {
            (Vec::new(), None)
        };
        Ok(Tracer {
            params,
            fine,
            coarse,
            kernel,
        })
    }

    fn trace<A: Acceptance>(&self, ap: &AccessPoint, rx: Vec3, acceptance: &A) -> Vec<ElementTrace> {
        let nb = self.params.n_bins();
        let ne = acceptance.element_count();
        let mut out: Vec<ElementTrace> = (0..ne)
            .map(|_| ElementTrace {
                bins: vec![0.0; nb],
                gain_by_order: [0.0; 3],
            })
            .collect();
        let inv_c_dt = 1.0 / (SPEED_OF_LIGHT_M_S * self.params.dt_s);

        self.trace_los(ap, rx, acceptance, &mut out, inv_c_dt);
        if self.params.max_order >= 1 {
            self.trace_single_bounce(ap, rx, acceptance, &mut out, inv_c_dt);
        }
        if self.params.max_order >= 2 {
            self.trace_double_bounce(ap, rx, acceptance, &mut out, inv_c_dt);
        }
        out
    }

    fn trace_los<A: Acceptance>(
        &self,
        ap: &AccessPoint,
        rx: Vec3,
        acceptance: &A,
        out: &mut [ElementTrace],
        inv_c_dt: f64,
    ) {
        let w = rx - ap.position;
        let d2 = w.norm_squared();
        if d2 <= 0.0 {
            return;
        }
        let d = d2.sqrt();
        let u = w / d;
        let cos_emit = ap.orientation.dot(u);
        if cos_emit <= 0.0 {
            return;
        }
        let bin = (d * inv_c_dt) as usize;
        if bin >= self.params.n_bins() {
            return;
        }
        let base = radiant_intensity_cos(ap.lambertian_order, cos_emit) / d2;
        acceptance.for_each(-u, |e, area| {
            let p = base * area;
            out[e].bins[bin] += p;
            out[e].gain_by_order[0] += p;
        });
    }

    fn trace_single_bounce<A: Acceptance>(
        &self,
        ap: &AccessPoint,
        rx: Vec3,
        acceptance: &A,
        out: &mut [ElementTrace],
        inv_c_dt: f64,
    ) {
        let nb = self.params.n_bins();
        for elem in &self.fine {
            let incident = ap_to_element(ap, elem);
            if incident <= 0.0 || elem.reflectance == 0.0 {
                continue;
            }
            let w = rx - elem.centre;
            let d2 = w.norm_squared();
            if d2 <= 0.0 {
                continue;
            }
            let d = d2.sqrt();
            let u = w / d;
            let cos_emit = elem.normal.dot(u);
            if cos_emit <= 0.0 {
                continue;
            }
            let d1 = ap.position.distance(elem.centre);
            let bin = ((d1 + d) * inv_c_dt) as usize;
            if bin >= nb {
                continue;
            }
            let exit =
                elem.reflectance * radiant_intensity_cos(elem.lambertian_order, cos_emit) / d2;
            let p0 = incident * exit;
            acceptance.for_each(-u, |e, area| {
                let p = p0 * area;
                out[e].bins[bin] += p;
                out[e].gain_by_order[1] += p;
            });
        }
    }

    fn trace_double_bounce<A: Acceptance>(
        &self,
        ap: &AccessPoint,
        rx: Vec3,
        acceptance: &A,
        out: &mut [ElementTrace],
        inv_c_dt: f64,
    ) {
        let kernel = self.kernel.as_ref().expect("kernel built for order 2");
        let nb = self.params.n_bins();
        let n = kernel.n;

        // Last hop: coarse patches visible to the receiver, with per-element
        // collection factors folded in.
        let mut hop_idx: Vec<u32> = Vec::new();
        let mut hop_dist: Vec<f64> = Vec::new();
        let mut hop_exit: Vec<f64> = Vec::new();
        let mut target_start: Vec<u32> = vec![0];
        let mut targets: Vec<(u32, f64)> = Vec::new();
        for (j, elem) in self.coarse.iter().enumerate() {
            if elem.reflectance == 0.0 {
                continue;
            }
            let w = rx - elem.centre;
            let d2 = w.norm_squared();
            if d2 <= 0.0 {
                continue;
            }
            let d = d2.sqrt();
            let u = w / d;
            let cos_emit = elem.normal.dot(u);
            if cos_emit <= 0.0 {
                continue;
            }
            let before = targets.len();
            acceptance.for_each(-u, |e, area| targets.push((e as u32, area)));
            if targets.len() == before {
                continue;
            }
            hop_idx.push(j as u32);
            hop_dist.push(d);
            hop_exit.push(
                elem.reflectance * radiant_intensity_cos(elem.lambertian_order, cos_emit) / d2,
            );
            target_start.push(targets.len() as u32);
        }
        if hop_idx.is_empty() {
            return;
        }

        for (i, elem) in self.coarse.iter().enumerate() {
            if elem.reflectance == 0.0 {
                continue;
            }
            let collected = ap_to_element(ap, elem) * elem.reflectance;
            if collected <= 0.0 {
                continue;
            }
            let d1 = ap.position.distance(elem.centre);
            let gain_row = &kernel.gain[i * n..(i + 1) * n];
            let dist_row = &kernel.dist[i * n..(i + 1) * n];
            for k in 0..hop_idx.len() {
                let j = hop_idx[k] as usize;
                let g = gain_row[j];
                if g == 0.0 {
                    continue;
                }
                let bin = ((d1 + dist_row[j] as f64 + hop_dist[k]) * inv_c_dt) as usize;
                if bin >= nb {
                    continue;
                }
                let p0 = collected * g as f64 * hop_exit[k];
                for &(e, area) in &targets[target_start[k] as usize..target_start[k + 1] as usize] {
                    let p = p0 * area;
                    let slot = &mut out[e as usize];
                    slot.bins[bin] += p;
                    slot.gain_by_order[2] += p;
                }
            }
        }
    }
}

/// Power collected by a reflector patch from an access point, per unit
/// transmitted power.
fn ap_to_element(ap: &AccessPoint, elem: &ReflectingElement) -> f64 {
    let w = elem.centre - ap.position;
    let d2 = w.norm_squared();
    if d2 <= 0.0 {
        return 0.0;
    }
    let d = d2.sqrt();
    let u = w / d;
    let cos_emit = ap.orientation.dot(u);
    if cos_emit <= 0.0 {
        return 0.0;
    }
    let cos_inc = -elem.normal.dot(u);
    if cos_inc <= 0.0 {
        return 0.0;
    }
    radiant_intensity_cos(ap.lambertian_order, cos_emit) * cos_inc * elem.area_m2 / d2
}

/// Impulse response from one access point to one bare collector. Builds a
/// fresh tracer per call; use [`build_channel_db`] to amortize the scene
/// setup over many locations.
pub fn trace_impulse_response(
    scene: &SceneConfig,
    ap: &AccessPoint,
    rx: &Collector,
    params: ChannelParams,
) -> Result<ImpulseResponse> {
    let tracer = Tracer::new(scene, params)?;
    let traced = tracer.trace(ap, rx.position, rx);
    Ok(ImpulseResponse::from_dense(params.dt_s, &traced[0].bins))
}

/// Traces the full channel database: one record per (location, access point,
/// receiver element). Work is parallelized over (location, access point)
/// pairs and reduced in key order, so the result is independent of the
/// worker count.
pub fn build_channel_db(
    scene: &SceneConfig,
    receiver: &ReceiverSpec,
    params: ChannelParams,
    locations: &[Vec3],
) -> Result<ChannelDb> {
    if locations.is_empty() {
        return Err(Error::Channel("no receiver locations given".into()));
    }
    scene.validate()?;
    let tracer = Tracer::new(scene, params)?;

    let n_aps = scene.access_points.len();
    let tasks: Vec<(usize, usize)> = (0..locations.len())
        .flat_map(|li| (0..n_aps).map(move |ai| (li, ai)))
        .collect();
    let traced: Vec<Vec<ElementTrace>> = tasks
        .par_iter()
        .map(|&(li, ai)| tracer.trace(&scene.access_points[ai], locations[li], receiver))
        .collect();

    let mut records = Vec::with_capacity(tasks.len() * receiver.element_count());
    for (t, (li, ai)) in tasks.iter().enumerate() {
        for (e, element) in traced[t].iter().enumerate() {
            let ir = ImpulseResponse::from_dense(params.dt_s, &element.bins);
            let dc_gain = ir.dc_gain();
            records.push(ChannelRecord {
                location_id: *li as u32 + 1,
                ap_id: scene.access_points[*ai].id,
                element_id: e as u32 + 1,
                ir,
                gain_by_order: element.gain_by_order,
                dc_gain,
            });
        }
    }

    let db = ChannelDb {
        scene_hash: scene.hash(),
        receiver: receiver.clone(),
        params,
        transmit: scene.wavelengths.clone(),
        access_points: scene.access_points.clone(),
        locations: locations
            .iter()
            .enumerate()
            .map(|(i, p)| DbLocation {
                id: i as u32 + 1,
                position: *p,
            })
            .collect(),
        records,
    };
    db.validate()?;
    Ok(db)
}
