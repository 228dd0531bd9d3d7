//! Receiver models: the four-branch angle-diversity receiver and the
//! lens-plus-pixel-array imaging receiver.
//!
//! Both receivers sit on the communication floor facing straight up. Every
//! acceptance function takes the *arrival direction*: the unit vector pointing
//! from the receiver towards the source of the incoming ray. A ray is either
//! rejected or credited to one or more receiver elements (angle-diversity
//! branches can overlap near the zenith; an imaging-lens direction always
//! maps to exactly one pixel).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReceiverKind {
    Adr,
    Imr,
}

impl ReceiverKind {
    pub fn name(self) -> &'static str {
        match self {
            ReceiverKind::Adr => "adr",
            ReceiverKind::Imr => "imr",
        }
    }

    pub fn parse(s: &str) -> Result<ReceiverKind> {
        match s.to_ascii_lowercase().as_str() {
            "adr" => Ok(ReceiverKind::Adr),
            "imr" => Ok(ReceiverKind::Imr),
            other => Err(Error::Receiver(format!(
                "unknown receiver '{other}' (expected adr or imr)"
            ))),
        }
    }
}

impl std::fmt::Display for ReceiverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Receiver front-end noise: current spectral density integrated over the
/// receiver bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReceiverNoise {
    pub density_a_per_sqrt_hz: f64,
    pub bandwidth_hz: f64,
}

/// RMS receiver noise current: `sigma = density * sqrt(bandwidth)`.
pub fn receiver_noise_sigma(noise: &ReceiverNoise) -> f64 {
    noise.density_a_per_sqrt_hz * noise.bandwidth_hz.sqrt()
}

/// Angle-diversity receiver: four narrow-field photodetectors aimed at fixed
/// azimuths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdrSpec {
    pub branch_azimuth_deg: [f64; 4],
    /// Elevation of every branch axis above the horizontal plane, degrees.
    pub branch_elevation_deg: f64,
    /// Acceptance semi-angle of each branch, degrees.
    pub fov_semi_angle_deg: f64,
    /// Photodetector area of each branch, m^2.
    pub detector_area_m2: f64,
    pub noise_density_a_per_sqrt_hz: f64,
    pub bandwidth_hz: f64,
}

impl Default for AdrSpec {
    fn default() -> Self {
        AdrSpec {
            branch_azimuth_deg: [45.0, 135.0, 225.0, 315.0],
            branch_elevation_deg: 70.0,
            fov_semi_angle_deg: 25.0,
            detector_area_m2: 20e-6,
            noise_density_a_per_sqrt_hz: 4.47e-12,
            bandwidth_hz: 5e9,
        }
    }
}

impl AdrSpec {
    pub fn branch_count(&self) -> usize {
        self.branch_azimuth_deg.len()
    }

    pub fn branch_normal(&self, branch: usize) -> Vec3 {
        branch_normal(self.branch_azimuth_deg[branch], self.branch_elevation_deg)
    }

    pub fn noise(&self) -> ReceiverNoise {
        ReceiverNoise {
            density_a_per_sqrt_hz: self.noise_density_a_per_sqrt_hz,
            bandwidth_hz: self.bandwidth_hz,
        }
    }
}

/// Imaging receiver: one collection lens focusing onto a 3x3 pixel array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImrSpec {
    /// Acceptance semi-angle of the lens, degrees.
    pub lens_fov_semi_angle_deg: f64,
    /// Total collection aperture shared by all pixels, m^2.
    pub aperture_area_m2: f64,
    pub noise_density_a_per_sqrt_hz: f64,
    pub bandwidth_hz: f64,
}

impl Default for ImrSpec {
    fn default() -> Self {
        ImrSpec {
            lens_fov_semi_angle_deg: 50.0,
            aperture_area_m2: 16e-6,
            noise_density_a_per_sqrt_hz: 10e-12,
            bandwidth_hz: 10e9,
        }
    }
}

impl ImrSpec {
    pub const PIXELS: usize = 9;

    pub fn noise(&self) -> ReceiverNoise {
        ReceiverNoise {
            density_a_per_sqrt_hz: self.noise_density_a_per_sqrt_hz,
            bandwidth_hz: self.bandwidth_hz,
        }
    }
}

/// Branch axis direction in the room frame (z up) from azimuth and elevation
/// above the horizontal: `(cos E cos Az, cos E sin Az, sin E)`.
pub fn branch_normal(azimuth_deg: f64, elevation_deg: f64) -> Vec3 {
    let az = azimuth_deg.to_radians();
    let el = elevation_deg.to_radians();
    Vec3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin())
}

/// Effective collection area of one branch for a ray arriving from
/// `arrival` (unit vector from the receiver towards the source), or `None`
/// when the ray falls outside the branch field of view.
pub fn adr_effective_area(spec: &AdrSpec, branch: usize, arrival: Vec3) -> Option<f64> {
    let normal = spec.branch_normal(branch);
    let cos_angle = normal.dot(arrival).clamp(-1.0, 1.0);
    let cos_fov = spec.fov_semi_angle_deg.to_radians().cos();
    if cos_angle + 1e-15 >= cos_fov {
        Some(spec.detector_area_m2 * cos_angle)
    } else {
        None
    }
}

/// Pixel (1..=9, row-major, 5 = centre) that collects a ray arriving from
/// `arrival`, or `None` when the ray is outside the lens field of view.
///
/// The lens projects the arrival direction to focal-plane coordinates
/// `(tan t cos p, tan t sin p)` (t = polar angle from the zenith, p = azimuth)
/// and the field-of-view disc is inscribed in the 3x3 pixel square. Cell
/// boundaries resolve to the lower pixel index.
pub fn imr_pixel_map(spec: &ImrSpec, arrival: Vec3) -> Option<u32> {
    let cos_theta = arrival.z.clamp(-1.0, 1.0);
    let fov = spec.lens_fov_semi_angle_deg.to_radians();
    if cos_theta + 1e-15 < fov.cos() {
        return None;
    }
    // Focal-plane coordinates; tan(theta)*cos(phi) = x/z, tan(theta)*sin(phi) = y/z.
    let (u, v) = if cos_theta >= 1.0 {
        (0.0, 0.0)
    } else {
        (arrival.x / arrival.z, arrival.y / arrival.z)
    };
    let half_side = fov.tan();
    let cell = 2.0 * half_side / 3.0;
    let col = cell_index(u + half_side, cell);
    let row = cell_index(v + half_side, cell);
    Some((row * 3 + col + 1) as u32)
}

/// Cell index 0..=2 with boundary values assigned to the lower cell.
fn cell_index(s: f64, cell: f64) -> usize {
    if s <= cell {
        0
    } else if s <= 2.0 * cell {
        1
    } else {
        2
    }
}

/// Effective collection area and target pixel for a ray arriving from
/// `arrival`; the aperture projects as `area * cos(theta)` and all accepted
/// power lands on the mapped pixel (unit lens transmission).
pub fn imr_effective_area(spec: &ImrSpec, arrival: Vec3) -> Option<(u32, f64)> {
    let pixel = imr_pixel_map(spec, arrival)?;
    let cos_theta = arrival.z.clamp(0.0, 1.0);
    Some((pixel, spec.aperture_area_m2 * cos_theta))
}

/// Either receiver model, as stored in channel databases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ReceiverSpec {
    Adr(AdrSpec),
    Imr(ImrSpec),
}

impl ReceiverSpec {
    pub fn new(kind: ReceiverKind) -> ReceiverSpec {
        match kind {
            ReceiverKind::Adr => ReceiverSpec::Adr(AdrSpec::default()),
            ReceiverKind::Imr => ReceiverSpec::Imr(ImrSpec::default()),
        }
    }

    pub fn kind(&self) -> ReceiverKind {
        match self {
            ReceiverSpec::Adr(_) => ReceiverKind::Adr,
            ReceiverSpec::Imr(_) => ReceiverKind::Imr,
        }
    }

    /// Number of separable receiver elements (branches or pixels).
    pub fn element_count(&self) -> usize {
        match self {
            ReceiverSpec::Adr(s) => s.branch_count(),
            ReceiverSpec::Imr(_) => ImrSpec::PIXELS,
        }
    }

    pub fn noise(&self) -> ReceiverNoise {
        match self {
            ReceiverSpec::Adr(s) => s.noise(),
            ReceiverSpec::Imr(s) => s.noise(),
        }
    }

    pub fn noise_sigma_a(&self) -> f64 {
        receiver_noise_sigma(&self.noise())
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.noise().bandwidth_hz
    }

    /// Visits every element that collects a ray arriving from `arrival`
    /// with its effective area in m^2. Element indices are 0-based.
    pub fn for_each_acceptance(&self, arrival: Vec3, mut f: impl FnMut(usize, f64)) {
        match self {
            ReceiverSpec::Adr(s) => {
                for branch in 0..s.branch_count() {
                    if let Some(area) = adr_effective_area(s, branch, arrival) {
                        f(branch, area);
                    }
                }
            }
            ReceiverSpec::Imr(s) => {
                if let Some((pixel, area)) = imr_effective_area(s, arrival) {
                    f(pixel as usize - 1, area);
                }
            }
        }
    }
}
