//! Room geometry, reflecting surfaces, access points and the user grid.
//!
//! A [`SceneConfig`] fully describes one simulation room: the rectangular
//! envelope, six Lambertian reflecting surfaces with per-bounce-order
//! discretization sizes, the ceiling-mounted access points with their
//! per-wavelength emitted powers, and the set of receiver locations on the
//! communication floor. Scenes are immutable once built and serialize to a
//! JSON schema; `default_room_scene` constructs the bundled reference room.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Geometric tolerances used when validating scene input.
const COPLANAR_TOL: f64 = 1e-9;
const AREA_REL_TOL: f64 = 1e-9;

/// The four laser-diode wavelengths emitted by every access point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Wavelength {
    Red,
    Yellow,
    Green,
    Blue,
}

impl Wavelength {
    pub const ALL: [Wavelength; 4] = [
        Wavelength::Red,
        Wavelength::Yellow,
        Wavelength::Green,
        Wavelength::Blue,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Wavelength::Red => "red",
            Wavelength::Yellow => "yellow",
            Wavelength::Green => "green",
            Wavelength::Blue => "blue",
        }
    }

    /// Stable index 0..4, also the ordering used for deterministic tie-breaks.
    pub fn index(self) -> usize {
        match self {
            Wavelength::Red => 0,
            Wavelength::Yellow => 1,
            Wavelength::Green => 2,
            Wavelength::Blue => 3,
        }
    }

    pub fn from_index(i: usize) -> Option<Wavelength> {
        Wavelength::ALL.get(i).copied()
    }
}

impl std::fmt::Display for Wavelength {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-wavelength emitter and detector figures shared by all access points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmitSpec {
    pub wavelength: Wavelength,
    /// Optical power of a single laser-diode module at this wavelength, W.
    pub power_per_module_w: f64,
    /// Photodetector responsivity at this wavelength, A/W.
    pub responsivity_a_per_w: f64,
}

/// One rectangular Lambertian reflector (a wall, the floor or the ceiling).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    pub id: u32,
    pub name: String,
    /// Rectangle corners in order around the perimeter; `corners[1] - corners[0]`
    /// and `corners[3] - corners[0]` are the two edges.
    pub corners: [Vec3; 4],
    /// Unit normal pointing into the room interior.
    pub normal: Vec3,
    /// Diffuse reflectance in [0, 1].
    pub reflectance: f64,
    /// Lambertian order of re-emission (1 for plaster-like surfaces).
    pub lambertian_order: f64,
}

impl Surface {
    fn edges(&self) -> (Vec3, Vec3) {
        (
            self.corners[1] - self.corners[0],
            self.corners[3] - self.corners[0],
        )
    }

    pub fn area(&self) -> f64 {
        let (e1, e2) = self.edges();
        e1.cross(e2).norm()
    }

    pub fn validate(&self) -> Result<()> {
        let (e1, e2) = self.edges();
        if e1.norm() <= 0.0 || e2.norm() <= 0.0 {
            return Err(Error::Scene(format!(
                "surface '{}': degenerate rectangle edges",
                self.name
            )));
        }
        if e1.dot(e2).abs() > COPLANAR_TOL {
            return Err(Error::Scene(format!(
                "surface '{}': corners do not form a rectangle",
                self.name
            )));
        }
        // Fourth corner must close the rectangle: corners[2] = corners[0] + e1 + e2.
        let closure = self.corners[2] - (self.corners[0] + e1 + e2);
        if closure.norm() > COPLANAR_TOL {
            return Err(Error::Scene(format!(
                "surface '{}': corners are not coplanar within {COPLANAR_TOL} m",
                self.name
            )));
        }
        if !self.normal.is_unit() {
            return Err(Error::Scene(format!(
                "surface '{}': normal is not unit-norm",
                self.name
            )));
        }
        if self.normal.dot(e1).abs() > COPLANAR_TOL || self.normal.dot(e2).abs() > COPLANAR_TOL {
            return Err(Error::Scene(format!(
                "surface '{}': normal is not perpendicular to the surface",
                self.name
            )));
        }
        if !(0.0..=1.0).contains(&self.reflectance) {
            return Err(Error::Scene(format!(
                "surface '{}': reflectance {} outside [0, 1]",
                self.name, self.reflectance
            )));
        }
        if self.lambertian_order < 1.0 {
            return Err(Error::Scene(format!(
                "surface '{}': Lambertian order must be >= 1",
                self.name
            )));
        }
        Ok(())
    }
}

/// One discretized patch of a surface, used as a secondary Lambertian emitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectingElement {
    pub centre: Vec3,
    /// Inherited inward surface normal.
    pub normal: Vec3,
    pub area_m2: f64,
    pub surface_id: u32,
    pub reflectance: f64,
    pub lambertian_order: f64,
}

/// A ceiling-mounted luminaire emitting all four wavelengths downwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccessPoint {
    /// 1-based identifier used in channel records and reports.
    pub id: u32,
    pub position: Vec3,
    /// Unit emission axis (straight down for ceiling units).
    pub orientation: Vec3,
    /// Lambertian emission order; 1 corresponds to a 60 degree half-power
    /// semi-angle.
    pub lambertian_order: f64,
    /// Number of RYGB laser-diode modules aggregated into this unit.
    pub n_ld_modules: u32,
}

/// Complete, immutable description of one simulated room.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    /// Room envelope: x in [0, extent.x], y in [0, extent.y], z in [0, extent.z].
    pub extent: Vec3,
    /// Height of the communication floor on which receivers sit, m.
    pub cf_height_m: f64,
    /// Reflector patch edge length used for single-bounce paths, m.
    pub element_size_order1_m: f64,
    /// Reflector patch edge length used for both hops of double-bounce paths, m.
    pub element_size_order2_m: f64,
    pub surfaces: Vec<Surface>,
    pub access_points: Vec<AccessPoint>,
    pub wavelengths: Vec<TransmitSpec>,
    /// Receiver evaluation locations (all on the communication floor).
    pub user_locations: Vec<Vec3>,
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        if self.extent.x <= 0.0 || self.extent.y <= 0.0 || self.extent.z <= 0.0 {
            return Err(Error::Scene("room extent must be positive".into()));
        }
        if !(0.0..self.extent.z).contains(&self.cf_height_m) {
            return Err(Error::Scene(format!(
                "communication floor height {} outside the room",
                self.cf_height_m
            )));
        }
        if self.element_size_order1_m <= 0.0 || self.element_size_order2_m <= 0.0 {
            return Err(Error::Scene("element sizes must be positive".into()));
        }
        if self.surfaces.is_empty() {
            return Err(Error::Scene("scene has no reflecting surfaces".into()));
        }
        for s in &self.surfaces {
            s.validate()?;
        }
        if self.access_points.is_empty() {
            return Err(Error::Scene("scene has no access points".into()));
        }
        for ap in &self.access_points {
            if !ap.orientation.is_unit() {
                return Err(Error::Scene(format!(
                    "access point {}: orientation is not unit-norm",
                    ap.id
                )));
            }
            if !self.contains(ap.position) {
                return Err(Error::Scene(format!(
                    "access point {}: position outside the room",
                    ap.id
                )));
            }
            if ap.lambertian_order < 1.0 {
                return Err(Error::Scene(format!(
                    "access point {}: Lambertian order must be >= 1",
                    ap.id
                )));
            }
            if ap.n_ld_modules == 0 {
                return Err(Error::Scene(format!(
                    "access point {}: needs at least one LD module",
                    ap.id
                )));
            }
        }
        let mut ids: Vec<u32> = self.access_points.iter().map(|a| a.id).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != self.access_points.len() {
            return Err(Error::Scene("duplicate access point ids".into()));
        }
        if self.wavelengths.is_empty() {
            return Err(Error::Scene("scene defines no wavelengths".into()));
        }
        for w in &self.wavelengths {
            if w.power_per_module_w <= 0.0 || w.responsivity_a_per_w <= 0.0 {
                return Err(Error::Scene(format!(
                    "wavelength {}: power and responsivity must be positive",
                    w.wavelength
                )));
            }
        }
        for (i, loc) in self.user_locations.iter().enumerate() {
            if !self.contains(*loc) {
                return Err(Error::Scene(format!(
                    "user location {} outside the room",
                    i + 1
                )));
            }
            if (loc.z - self.cf_height_m).abs() > COPLANAR_TOL {
                return Err(Error::Scene(format!(
                    "user location {} not on the communication floor",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    pub fn contains(&self, p: Vec3) -> bool {
        (0.0..=self.extent.x).contains(&p.x)
            && (0.0..=self.extent.y).contains(&p.y)
            && (0.0..=self.extent.z).contains(&p.z)
    }

    /// Total transmitted optical power of one access point at one wavelength
    /// (module power times module count).
    pub fn tx_power_w(&self, ap: &AccessPoint, wl: Wavelength) -> Result<f64> {
        let spec = self.transmit_spec(wl)?;
        Ok(spec.power_per_module_w * ap.n_ld_modules as f64)
    }

    pub fn responsivity_a_per_w(&self, wl: Wavelength) -> Result<f64> {
        Ok(self.transmit_spec(wl)?.responsivity_a_per_w)
    }

    pub fn transmit_spec(&self, wl: Wavelength) -> Result<&TransmitSpec> {
        self.wavelengths
            .iter()
            .find(|s| s.wavelength == wl)
            .ok_or_else(|| Error::Scene(format!("wavelength {wl} not defined in scene")))
    }

    pub fn access_point(&self, id: u32) -> Result<&AccessPoint> {
        self.access_points
            .iter()
            .find(|a| a.id == id)
            .ok_or_else(|| Error::Scene(format!("unknown access point id {id}")))
    }

    /// SHA-256 of the canonical (compact JSON) scene serialization. Identifies
    /// the scene inside channel databases and run manifests.
    pub fn hash(&self) -> [u8; 32] {
        let json = serde_json::to_string(self).expect("scene serialization cannot fail");
        Sha256::digest(json.as_bytes()).into()
    }

    pub fn hash_hex(&self) -> String {
        self.hash().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_json_str(json: &str) -> Result<SceneConfig> {
        let scene: SceneConfig = serde_json::from_str(json)
            .map_err(|e| Error::Scene(format!("invalid scene JSON: {e}")))?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn load(path: &Path) -> Result<SceneConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let scene: SceneConfig =
            serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
        scene
            .validate()
            .map_err(|e| Error::parse(path, e.to_string()))?;
        Ok(scene)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Scene(format!("scene serialization failed: {e}")))?;
        json.push('\n');
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }
}

/// Lambertian order implied by a half-power semi-angle:
/// `n = -ln 2 / ln cos(angle)`. Results within 1e-9 of an integer snap to it,
/// so the canonical 60 degree semi-angle yields exactly 1.
pub fn lambertian_order_from_half_angle(semi_angle_rad: f64) -> f64 {
    let n = -std::f64::consts::LN_2 / semi_angle_rad.cos().ln();
    let rounded = n.round();
    if (n - rounded).abs() < 1e-9 {
        rounded
    } else {
        n
    }
}

/// The bundled reference room: 8 m x 4 m x 3 m, plaster walls and ceiling
/// (reflectance 0.8), floor reflectance 0.3, eight 12-module RYGB access
/// points on the ceiling, 5 cm / 20 cm reflector patches, and the standard
/// 32-point evaluation grid on the 1 m communication floor.
pub fn default_room_scene() -> SceneConfig {
    room_scene_with_elements(0.05, 0.20)
}

/// Same room as [`default_room_scene`] with much coarser reflector patches
/// (25 cm / 50 cm); used for fast smoke runs and CI.
pub fn fast_room_scene() -> SceneConfig {
    room_scene_with_elements(0.25, 0.50)
}

fn room_scene_with_elements(size_order1: f64, size_order2: f64) -> SceneConfig {
    let ap_xy = [
        (1.0, 1.0),
        (1.0, 3.0),
        (1.0, 5.0),
        (1.0, 7.0),
        (3.0, 1.0),
        (3.0, 3.0),
        (3.0, 5.0),
        (3.0, 7.0),
    ];
    let wavelengths = vec![
        TransmitSpec {
            wavelength: Wavelength::Red,
            power_per_module_w: 0.8,
            responsivity_a_per_w: 0.4,
        },
        TransmitSpec {
            wavelength: Wavelength::Yellow,
            power_per_module_w: 0.5,
            responsivity_a_per_w: 0.35,
        },
        TransmitSpec {
            wavelength: Wavelength::Green,
            power_per_module_w: 0.3,
            responsivity_a_per_w: 0.3,
        },
        TransmitSpec {
            wavelength: Wavelength::Blue,
            power_per_module_w: 0.3,
            responsivity_a_per_w: 0.2,
        },
    ];
    let mut scene = box_room_scene(BoxRoom {
        extent: Vec3::new(4.0, 8.0, 3.0),
        cf_height_m: 1.0,
        wall_reflectance: 0.8,
        floor_reflectance: 0.3,
        element_size_order1_m: size_order1,
        element_size_order2_m: size_order2,
        ap_positions: ap_xy.iter().map(|&(x, y)| Vec3::new(x, y, 3.0)).collect(),
        n_ld_modules: 12,
        wavelengths,
    });
    scene.user_locations = test_grid(&scene);
    scene
}

/// Parameters for [`box_room_scene`].
#[derive(Debug, Clone)]
pub struct BoxRoom {
    pub extent: Vec3,
    pub cf_height_m: f64,
    pub wall_reflectance: f64,
    pub floor_reflectance: f64,
    pub element_size_order1_m: f64,
    pub element_size_order2_m: f64,
    /// Ceiling-mounted, downward-facing emitter positions.
    pub ap_positions: Vec<Vec3>,
    pub n_ld_modules: u32,
    pub wavelengths: Vec<TransmitSpec>,
}

/// Builds an empty rectangular room with six Lambertian surfaces (walls and
/// ceiling sharing one reflectance, the floor its own) and order-1 emitters.
/// User locations start empty.
pub fn box_room_scene(spec: BoxRoom) -> SceneConfig {
    let extent = spec.extent;
    let order = 1.0;
    let wall_reflectance = spec.wall_reflectance;
    let floor_reflectance = spec.floor_reflectance;

    let v = Vec3::new;
    let surfaces = vec![
        Surface {
            id: 1,
            name: "floor".into(),
            corners: [
                v(0.0, 0.0, 0.0),
                v(extent.x, 0.0, 0.0),
                v(extent.x, extent.y, 0.0),
                v(0.0, extent.y, 0.0),
            ],
            normal: Vec3::UP,
            reflectance: floor_reflectance,
            lambertian_order: order,
        },
        Surface {
            id: 2,
            name: "ceiling".into(),
            corners: [
                v(0.0, 0.0, extent.z),
                v(extent.x, 0.0, extent.z),
                v(extent.x, extent.y, extent.z),
                v(0.0, extent.y, extent.z),
            ],
            normal: Vec3::DOWN,
            reflectance: wall_reflectance,
            lambertian_order: order,
        },
        Surface {
            id: 3,
            name: "wall_x0".into(),
            corners: [
                v(0.0, 0.0, 0.0),
                v(0.0, extent.y, 0.0),
                v(0.0, extent.y, extent.z),
                v(0.0, 0.0, extent.z),
            ],
            normal: v(1.0, 0.0, 0.0),
            reflectance: wall_reflectance,
            lambertian_order: order,
        },
        Surface {
            id: 4,
            name: "wall_x4".into(),
            corners: [
                v(extent.x, 0.0, 0.0),
                v(extent.x, extent.y, 0.0),
                v(extent.x, extent.y, extent.z),
                v(extent.x, 0.0, extent.z),
            ],
            normal: v(-1.0, 0.0, 0.0),
            reflectance: wall_reflectance,
            lambertian_order: order,
        },
        Surface {
            id: 5,
            name: "wall_y0".into(),
            corners: [
                v(0.0, 0.0, 0.0),
                v(extent.x, 0.0, 0.0),
                v(extent.x, 0.0, extent.z),
                v(0.0, 0.0, extent.z),
            ],
            normal: v(0.0, 1.0, 0.0),
            reflectance: wall_reflectance,
            lambertian_order: order,
        },
        Surface {
            id: 6,
            name: "wall_y8".into(),
            corners: [
                v(0.0, extent.y, 0.0),
                v(extent.x, extent.y, 0.0),
                v(extent.x, extent.y, extent.z),
                v(0.0, extent.y, extent.z),
            ],
            normal: v(0.0, -1.0, 0.0),
            reflectance: wall_reflectance,
            lambertian_order: order,
        },
    ];

    let access_points = spec
        .ap_positions
        .iter()
        .enumerate()
        .map(|(i, &position)| AccessPoint {
            id: i as u32 + 1,
            position,
            orientation: Vec3::DOWN,
            lambertian_order: lambertian_order_from_half_angle(60f64.to_radians()),
            n_ld_modules: spec.n_ld_modules,
        })
        .collect();

    SceneConfig {
        extent,
        cf_height_m: spec.cf_height_m,
        element_size_order1_m: spec.element_size_order1_m,
        element_size_order2_m: spec.element_size_order2_m,
        surfaces,
        access_points,
        wavelengths: spec.wavelengths,
        user_locations: Vec::new(),
    }
}

/// Evaluation grid on the communication floor: points at 0.5 m, 1.5 m, ... in
/// both axes. For the default 4 m x 8 m room this is the standard 4 x 8 grid
/// of 32 locations.
pub fn test_grid(scene: &SceneConfig) -> Vec<Vec3> {
    let mut points = Vec::new();
    let mut y = 0.5;
    while y < scene.extent.y {
        let mut x = 0.5;
        while x < scene.extent.x {
            points.push(Vec3::new(x, y, scene.cf_height_m));
            x += 1.0;
        }
        y += 1.0;
    }
    points
}

/// Splits every surface into near-square patches of the given edge length.
/// Grids are anchored at the first corner; when the size does not divide a
/// surface dimension, the last row/column is clipped so the patches tile the
/// surface exactly.
pub fn discretize_surfaces(
    scene: &SceneConfig,
    element_size_m: f64,
) -> Result<Vec<ReflectingElement>> {
    if element_size_m <= 0.0 {
        return Err(Error::Scene(format!(
            "element size must be positive, got {element_size_m}"
        )));
    }
    let mut elements = Vec::new();
    for surface in &scene.surfaces {
        let (e1, e2) = (
            surface.corners[1] - surface.corners[0],
            surface.corners[3] - surface.corners[0],
        );
        let len1 = e1.norm();
        let len2 = e2.norm();
        let u1 = e1 / len1;
        let u2 = e2 / len2;
        let cells1 = axis_cells(len1, element_size_m);
        let cells2 = axis_cells(len2, element_size_m);
        for &(c2, w2) in &cells2 {
            for &(c1, w1) in &cells1 {
                elements.push(ReflectingElement {
                    centre: surface.corners[0] + u1 * c1 + u2 * c2,
                    normal: surface.normal,
                    area_m2: w1 * w2,
                    surface_id: surface.id,
                    reflectance: surface.reflectance,
                    lambertian_order: surface.lambertian_order,
                });
            }
        }
        // Tiling check: discretization must preserve the surface area.
        let tiled: f64 = cells1.iter().map(|c| c.1).sum::<f64>()
            * cells2.iter().map(|c| c.1).sum::<f64>();
        let rel = (tiled - surface.area()).abs() / surface.area();
        if rel > AREA_REL_TOL {
            return Err(Error::Scene(format!(
                "surface '{}': discretization does not tile the area (rel err {rel:.2e})",
                surface.name
            )));
        }
    }
    Ok(elements)
}

/// 1D cell decomposition: full-size cells plus an optional clipped tail cell.
/// Returns (centre offset, width) pairs.
fn axis_cells(length: f64, size: f64) -> Vec<(f64, f64)> {
    let n_full = (length / size + 1e-9).floor() as usize;
    let mut cells: Vec<(f64, f64)> = (0..n_full)
        .map(|i| ((i as f64 + 0.5) * size, size))
        .collect();
    let remainder = length - n_full as f64 * size;
    if remainder > 1e-9 * length.max(1.0) {
        cells.push((n_full as f64 * size + remainder / 2.0, remainder));
    }
    cells
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_room_matches_reference_values() {
        let scene = default_room_scene();
        scene.validate().unwrap();
        assert_eq!(scene.extent, Vec3::new(4.0, 8.0, 3.0));
        assert_eq!(scene.access_points.len(), 8);
        // AP 1 sits at (1, 1, 3).
        let ap1 = scene.access_point(1).unwrap();
        assert_eq!(ap1.position, Vec3::new(1.0, 1.0, 3.0));
        assert_eq!(ap1.n_ld_modules, 12);
        // Floor reflectance 0.3, walls and ceiling 0.8.
        let floor = scene.surfaces.iter().find(|s| s.name == "floor").unwrap();
        assert_eq!(floor.reflectance, 0.3);
        for s in scene.surfaces.iter().filter(|s| s.name != "floor") {
            assert_eq!(s.reflectance, 0.8);
        }
        // Total per-AP red power: 12 modules x 0.8 W.
        let red = scene.tx_power_w(ap1, Wavelength::Red).unwrap();
        assert!((red - 9.6).abs() < 1e-12);
    }

    #[test]
    fn emitter_order_from_sixty_degree_half_angle_is_exactly_one() {
        let n = lambertian_order_from_half_angle(60f64.to_radians());
        assert_eq!(n, 1.0);
        for ap in default_room_scene().access_points {
            assert_eq!(ap.lambertian_order, 1.0);
        }
    }

    #[test]
    fn grid_has_32_points_including_scenario_locations() {
        let scene = default_room_scene();
        let grid = test_grid(&scene);
        assert_eq!(grid.len(), 32);
        for expected in [Vec3::new(0.5, 6.5, 1.0), Vec3::new(3.5, 4.5, 1.0)] {
            assert!(grid.contains(&expected));
        }
        // Every scenario location from the bundled fixtures is a grid point.
        let scenario_points = [
            (0.5, 6.5),
            (0.5, 7.5),
            (1.5, 6.5),
            (1.5, 7.5),
            (2.5, 0.5),
            (2.5, 1.5),
            (3.5, 0.5),
            (3.5, 1.5),
            (0.5, 5.5),
            (1.5, 1.5),
            (1.5, 3.5),
            (2.5, 2.5),
            (2.5, 6.5),
            (3.5, 4.5),
        ];
        for (x, y) in scenario_points {
            assert!(grid.contains(&Vec3::new(x, y, 1.0)));
        }
    }

    #[test]
    fn discretization_counts_for_reference_room() {
        let scene = default_room_scene();
        // 136 m^2 of surfaces: 0.2 m patches -> 3400, 0.05 m patches -> 54400.
        assert_eq!(discretize_surfaces(&scene, 0.20).unwrap().len(), 3400);
        assert_eq!(discretize_surfaces(&scene, 0.05).unwrap().len(), 54400);
    }

    #[test]
    fn discretization_rejects_nonpositive_size() {
        let scene = default_room_scene();
        assert!(discretize_surfaces(&scene, -1.0).is_err());
        assert!(discretize_surfaces(&scene, 0.0).is_err());
    }

    #[test]
    fn elements_tile_each_surface_and_point_inward() {
        let scene = default_room_scene();
        let elements = discretize_surfaces(&scene, 0.20).unwrap();
        let centre = Vec3::new(2.0, 4.0, 1.5);
        for surface in &scene.surfaces {
            let total: f64 = elements
                .iter()
                .filter(|e| e.surface_id == surface.id)
                .map(|e| e.area_m2)
                .sum();
            let rel = (total - surface.area()).abs() / surface.area();
            assert!(rel <= 1e-9, "surface {} rel err {rel}", surface.name);
        }
        for e in &elements {
            assert!(e.normal.dot(centre - e.centre) > 0.0, "normal not inward");
        }
    }

    #[test]
    fn clipped_grids_still_tile() {
        // 0.3 m does not divide 4 m or 8 m or 3 m; clipped cells must keep
        // the tiling exact.
        let scene = default_room_scene();
        let elements = discretize_surfaces(&scene, 0.3).unwrap();
        let total: f64 = elements.iter().map(|e| e.area_m2).sum();
        assert!((total - 136.0).abs() / 136.0 <= 1e-9);
    }

    #[test]
    fn bundled_scene_files_match_builders() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
        let bundled = SceneConfig::load(&dir.join("room_scene.json")).unwrap();
        assert_eq!(bundled, default_room_scene());
        let fast = SceneConfig::load(&dir.join("fast_scene.json")).unwrap();
        assert_eq!(fast, fast_room_scene());
    }

    #[test]
    fn scene_json_round_trip_preserves_hash() {
        let scene = default_room_scene();
        let json = serde_json::to_string(&scene).unwrap();
        let back = SceneConfig::from_json_str(&json).unwrap();
        assert_eq!(back, scene);
        assert_eq!(back.hash(), scene.hash());
    }

    #[test]
    fn invalid_scene_is_rejected_with_field_context() {
        let mut scene = default_room_scene();
        scene.surfaces[0].reflectance = 1.5;
        let err = scene.validate().unwrap_err();
        assert!(err.to_string().contains("reflectance"));
        assert_eq!(err.category(), "scene");
    }
}
