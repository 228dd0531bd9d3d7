//! Shared helpers for the integration suites.
#![allow(dead_code)] // each test binary uses a different subset

use owc_core::geometry::Vec3;
use owc_core::propagation::{ChannelDb, ChannelParams, ChannelRecord, DbLocation, ImpulseResponse};
use owc_core::receivers::ReceiverSpec;
use owc_core::scene::{AccessPoint, TransmitSpec, Wavelength};
use std::path::PathBuf;

/// Path of a bundled data fixture.
pub fn data_file(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

/// In-memory channel database with prescribed DC gains, for allocation tests
/// that need exact control over the geometry.
/// `gains(location_id, ap_id, element_id)` supplies the per-record gain.
pub fn synth_db(
    n_locations: u32,
    n_aps: u32,
    receiver: ReceiverSpec,
    wavelengths: &[Wavelength],
    gains: &dyn Fn(u32, u32, u32) -> f64,
) -> ChannelDb {
    let params = ChannelParams::default();
    let transmit: Vec<TransmitSpec> = wavelengths
        .iter()
        .map(|&wl| {
            let (p, r) = match wl {
                Wavelength::Red => (0.8, 0.4),
                Wavelength::Yellow => (0.5, 0.35),
                Wavelength::Green => (0.3, 0.3),
                Wavelength::Blue => (0.3, 0.2),
            };
            TransmitSpec {
                wavelength: wl,
                power_per_module_w: p,
                responsivity_a_per_w: r,
            }
        })
        .collect();
    let access_points: Vec<AccessPoint> = (1..=n_aps)
        .map(|id| AccessPoint {
            id,
            position: Vec3::new(id as f64, 1.0, 3.0),
            orientation: Vec3::DOWN,
            lambertian_order: 1.0,
            n_ld_modules: 12,
        })
        .collect();
    let locations: Vec<DbLocation> = (1..=n_locations)
        .map(|id| DbLocation {
            id,
            position: Vec3::new(id as f64 * 0.5, 0.5, 1.0),
        })
        .collect();
    let ne = receiver.element_count() as u32;
    let mut records = Vec::new();
    for loc in &locations {
        for ap in &access_points {
            for e in 1..=ne {
                let g = gains(loc.id, ap.id, e);
                let ir = if g > 0.0 {
                    ImpulseResponse {
                        dt_s: params.dt_s,
                        t0_s: 10e-9,
                        bins: vec![g],
                    }
                } else {
                    ImpulseResponse {
                        dt_s: params.dt_s,
                        t0_s: 0.0,
                        bins: vec![],
                    }
                };
                records.push(ChannelRecord {
                    location_id: loc.id,
                    ap_id: ap.id,
                    element_id: e,
                    gain_by_order: [g, 0.0, 0.0],
                    dc_gain: g,
                    ir,
                });
            }
        }
    }
    let db = ChannelDb {
        scene_hash: [0; 32],
        receiver,
        params,
        transmit,
        access_points,
        locations,
        records,
    };
    db.validate().unwrap();
    db
}
