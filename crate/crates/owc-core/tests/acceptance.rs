//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (run with `--nocapture` to see them).
//!
//! Criteria 1-6 run the full-resolution reference room (5 cm / 20 cm
//! reflector patches, 32-location grid); the databases are built once and
//! shared. Criteria 7-11 are property checks on randomized small scenes and
//! synthetic instances.

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use once_cell::sync::Lazy;
use rand::{Rng, SeedableRng};

use common::{data_file, synth_db};
use owc_core::allocation::{
    brute_force_oracle, data_rate_bps, evaluate_assignment, optimize, Assignment,
    AllocationProblem, Scenario, SinrMode, UserAssignment,
};
use owc_core::analysis::{bandwidth_3db, bandwidth_cdf};
use owc_core::cli::{cmd_analyze, cmd_build_db, cmd_optimize, AnalyzeCmd, BuildDbCmd, OptimizeCmd};
use owc_core::geometry::Vec3;
use owc_core::propagation::{
    build_channel_db, trace_impulse_response, ChannelDb, ChannelParams, Collector,
    ImpulseResponse,
};
use owc_core::receivers::{ReceiverKind, ReceiverSpec};
use owc_core::scene::{
    box_room_scene, default_room_scene, fast_room_scene, AccessPoint, BoxRoom, TransmitSpec,
    Wavelength,
};

struct FullScale {
    adr: ChannelDb,
    imr: ChannelDb,
}

static FULL: Lazy<FullScale> = Lazy::new(|| {
    let scene = default_room_scene();
    let params = ChannelParams::default();
    let adr = build_channel_db(
        &scene,
        &ReceiverSpec::new(ReceiverKind::Adr),
        params,
        &scene.user_locations,
    )
    .expect("full ADR database");
    let imr = build_channel_db(
        &scene,
        &ReceiverSpec::new(ReceiverKind::Imr),
        params,
        &scene.user_locations,
    )
    .expect("full ImR database");
    FullScale { adr, imr }
});

fn criterion(n: u32, name: &str, pass: bool, details: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {n} ({name}): {verdict}: {details}");
    assert!(pass, "criterion {n} ({name}): {verdict}: {details}");
}

fn solve(db: &ChannelDb, scenario_file: &str) -> owc_core::allocation::AllocationReport {
    let scenario = Scenario::load(&data_file(scenario_file)).expect("bundled scenario");
    let sites = scenario.resolve(db).expect("scenario locations in grid");
    let problem = AllocationProblem::new(db, sites, SinrMode::Linear).unwrap();
    optimize(&problem).expect("optimizer")
}

#[test]
fn criterion_1_adr_bandwidth_envelope() {
    let cdf = bandwidth_cdf(&FULL.adr).unwrap();
    let (min, max) = (cdf.min(), cdf.max());
    let ok = (3.6e9..=5.4e9).contains(&min) && (7.2e9..=10.8e9).contains(&max);
    criterion(
        1,
        "ADR bandwidth envelope",
        ok,
        format!(
            "min {:.3} GHz (want 3.6..5.4), max {:.3} GHz (want 7.2..10.8)",
            min / 1e9,
            max / 1e9
        ),
    );
}

#[test]
fn criterion_2_imr_bandwidth_envelope_and_dominance() {
    let imr = bandwidth_cdf(&FULL.imr).unwrap();
    let adr = bandwidth_cdf(&FULL.adr).unwrap();
    let (min, max) = (imr.min(), imr.max());
    let env_ok = (6.0e9..=9.0e9).contains(&min) && (16.0e9..=24.0e9).contains(&max);
    let dominated = imr
        .values
        .iter()
        .zip(&adr.values)
        .filter(|(i, a)| i <= a)
        .count();
    let ok = env_ok && dominated == 0;
    criterion(
        2,
        "ImR bandwidth envelope and dominance",
        ok,
        format!(
            "min {:.3} GHz (want 6..9), max {:.3} GHz (want 16..24), quantiles not dominating ADR: {dominated}/32",
            min / 1e9,
            max / 1e9
        ),
    );
}

#[test]
fn criterion_3_data_rate_mapping() {
    let adr_rate = data_rate_bps(5e9);
    let imr_rate = data_rate_bps(10e9);
    let ok = (adr_rate - 7.1e9).abs() < 1e-3 && (imr_rate - 14.2e9).abs() < 1e-3;
    criterion(
        3,
        "data-rate mapping",
        ok,
        format!(
            "5 GHz -> {:.4} Gbps (want 7.1), 10 GHz -> {:.4} Gbps (want 14.2)",
            adr_rate / 1e9,
            imr_rate / 1e9
        ),
    );
}

#[test]
fn criterion_4_distributed_scenario_reproduction() {
    // Reference allocation for the distributed eight-user scenario: each user
    // on its nearest access point, all red; the imaging receiver collects on
    // the centre pixel everywhere.
    let expected_aps = [3u32, 1, 2, 4, 6, 8, 5, 7];
    let mut failures = Vec::new();
    for (db, label) in [(&FULL.adr, "adr"), (&FULL.imr, "imr")] {
        let report = solve(db, "scenario2.json");
        for (i, user) in report.users.iter().enumerate() {
            if user.ap_id != expected_aps[i] {
                failures.push(format!(
                    "{label} user {}: ap {} (want {})",
                    user.user_id, user.ap_id, expected_aps[i]
                ));
            }
            if user.wavelength != Wavelength::Red {
                failures.push(format!(
                    "{label} user {}: wavelength {} (want red)",
                    user.user_id, user.wavelength
                ));
            }
            if *label == *"imr" && user.element_id != 5 {
                failures.push(format!(
                    "imr user {}: pixel {} (want 5)",
                    user.user_id, user.element_id
                ));
            }
        }
    }
    criterion(
        4,
        "distributed scenario reproduction",
        failures.is_empty(),
        if failures.is_empty() {
            "all 8 users on the reference access points, all red, ImR pixel 5".to_string()
        } else {
            failures.join("; ")
        },
    );
}

/// Reference allocations for the clustered eight-user scenario,
/// (user, ap, element, wavelength).
const CLUSTERED_REFERENCE_ADR: [(u32, u32, u32, Wavelength); 8] = [
    (1, 3, 4, Wavelength::Red),
    (2, 4, 4, Wavelength::Yellow),
    (3, 8, 1, Wavelength::Red),
    (4, 4, 3, Wavelength::Red),
    (5, 5, 1, Wavelength::Red),
    (6, 1, 3, Wavelength::Red),
    (7, 5, 2, Wavelength::Yellow),
    (8, 6, 2, Wavelength::Red),
];
const CLUSTERED_REFERENCE_IMR: [(u32, u32, u32, Wavelength); 8] = [
    (1, 3, 4, Wavelength::Red),
    (2, 4, 5, Wavelength::Red),
    (3, 4, 5, Wavelength::Yellow),
    (4, 8, 8, Wavelength::Red),
    (5, 1, 2, Wavelength::Red),
    (6, 5, 5, Wavelength::Yellow),
    (7, 5, 5, Wavelength::Red),
    (8, 6, 6, Wavelength::Red),
];

#[test]
fn criterion_5_clustered_scenario_dominance() {
    let mut ok = true;
    let mut details = Vec::new();
    for (db, label, reference) in [
        (&FULL.adr, "adr", &CLUSTERED_REFERENCE_ADR),
        (&FULL.imr, "imr", &CLUSTERED_REFERENCE_IMR),
    ] {
        let scenario = Scenario::load(&data_file("scenario1.json")).unwrap();
        let sites = scenario.resolve(db).unwrap();
        let problem = AllocationProblem::new(db, sites, SinrMode::Linear).unwrap();
        let report = optimize(&problem).unwrap();

        let reference_assignment = Assignment {
            entries: reference
                .iter()
                .map(|&(user_id, ap_id, element_id, wavelength)| UserAssignment {
                    user_id,
                    ap_id,
                    wavelength,
                    element_id,
                })
                .collect(),
        };
        let reference_report = evaluate_assignment(&problem, &reference_assignment).unwrap();
        ok &= report.objective >= reference_report.objective;

        // Row differences are informational, not failures.
        let mismatches: Vec<u32> = report
            .users
            .iter()
            .zip(reference.iter())
            .filter(|(u, &(_, ap, elem, wl))| {
                u.ap_id != ap || u.wavelength != wl || u.element_id != elem
            })
            .map(|(u, _)| u.user_id)
            .collect();
        details.push(format!(
            "{label}: objective {:.4} vs reference {:.4}, rows differing from reference: {:?}",
            report.objective, reference_report.objective, mismatches
        ));
    }
    criterion(5, "clustered scenario dominance", ok, details.join("; "));
}

#[test]
fn criterion_6_imr_sinr_above_adr() {
    let mut failures = Vec::new();
    for scenario_file in ["scenario1.json", "scenario2.json"] {
        let adr = solve(&FULL.adr, scenario_file);
        let imr = solve(&FULL.imr, scenario_file);
        for (a, i) in adr.users.iter().zip(&imr.users) {
            assert_eq!(a.user_id, i.user_id);
            if i.sinr.sinr_db <= a.sinr.sinr_db {
                failures.push(format!(
                    "{scenario_file} user {}: imr {:.2} dB <= adr {:.2} dB",
                    a.user_id, i.sinr.sinr_db, a.sinr.sinr_db
                ));
            }
        }
    }
    criterion(
        6,
        "ImR SINR above ADR for every user",
        failures.is_empty(),
        if failures.is_empty() {
            "all 16 user slots favour the imaging receiver".to_string()
        } else {
            failures.join("; ")
        },
    );
}

#[test]
fn criterion_7_los_oracle() {
    // Zero-reflectance room: the traced response must equal the closed-form
    // Lambertian line-of-sight gain.
    let mut scene = fast_room_scene();
    for s in &mut scene.surfaces {
        s.reflectance = 0.0;
    }
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let unit = |rng: &mut rand::rngs::StdRng| loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        if v.norm_squared() > 1e-3 {
            break v.normalized().unwrap();
        }
    };
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let ap = AccessPoint {
            id: 1,
            position: Vec3::new(
                rng.gen_range(0.2..3.8),
                rng.gen_range(0.2..7.8),
                rng.gen_range(1.8..3.0),
            ),
            orientation: unit(&mut rng),
            lambertian_order: [1.0, 2.0, 3.0][rng.gen_range(0..3usize)],
            n_ld_modules: 12,
        };
        let rx = Collector {
            position: Vec3::new(
                rng.gen_range(0.2..3.8),
                rng.gen_range(0.2..7.8),
                rng.gen_range(0.2..1.5),
            ),
            normal: unit(&mut rng),
            area_m2: rng.gen_range(1e-6..1e-4),
            fov_semi_angle_rad: std::f64::consts::FRAC_PI_2,
        };
        let ir = trace_impulse_response(&scene, &ap, &rx, ChannelParams::default()).unwrap();
        let traced = ir.dc_gain();

        // Closed form, written out independently of the tracer.
        let w = rx.position - ap.position;
        let d2 = w.norm_squared();
        let u = w / d2.sqrt();
        let cos_emit = ap.orientation.dot(u);
        let cos_inc = rx.normal.dot(-u);
        let expected = if cos_emit > 0.0 && cos_inc > 0.0 {
            (ap.lambertian_order + 1.0) / (2.0 * std::f64::consts::PI)
                * cos_emit.powf(ap.lambertian_order)
                * cos_inc
                * rx.area_m2
                / d2
        } else {
            0.0
        };
        if expected == 0.0 {
            assert_eq!(traced, 0.0, "trial {trial}");
        } else {
            let rel = ((traced - expected) / expected).abs();
            worst = worst.max(rel);
            assert!(rel <= 1e-12, "trial {trial}: rel err {rel}");
        }
    }
    criterion(
        7,
        "line-of-sight oracle",
        true,
        format!("100 random source/collector pairs, worst relative error {worst:.2e}"),
    );
}

#[test]
fn criterion_8_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = rand::rngs::StdRng::seed_from_u64(0xACCE55);
    let mut worst: f64 = 0.0;
    for trial in 0..200 {
        let n_users = rng.gen_range(1..=3u32);
        let n_aps = rng.gen_range(n_users.max(2)..=4u32);
        let n_wl = rng.gen_range(1..=2usize);
        let n_elems = 4u32; // four-branch receiver
        let gains: Vec<f64> = (0..(n_users * n_aps * n_elems))
            .map(|_| 10f64.powf(rng.gen_range(-8.0..-5.0)))
            .collect();
        let gain_fn = {
            let gains = gains.clone();
            move |loc: u32, ap: u32, e: u32| -> f64 {
                gains[(((loc - 1) * n_aps + (ap - 1)) * n_elems + (e - 1)) as usize]
            }
        };
        let mode = if trial % 2 == 0 {
            SinrMode::Linear
        } else {
            SinrMode::Squared
        };
        let db = synth_db(
            n_users,
            n_aps,
            ReceiverSpec::new(ReceiverKind::Adr),
            &Wavelength::ALL[..n_wl],
            &gain_fn,
        );
        let users = (1..=n_users)
            .map(|u| owc_core::allocation::UserSite {
                user_id: u,
                location_id: u,
            })
            .collect();
        let problem = AllocationProblem::new(&db, users, mode).unwrap();
        let fast = optimize(&problem).unwrap();
        let slow = brute_force_oracle(&problem).unwrap();
        let rel = (fast.objective - slow.objective).abs() / slow.objective.abs();
        worst = worst.max(rel);
        assert!(
            rel < 1e-9,
            "trial {trial}: optimizer {} vs oracle {}",
            fast.objective,
            slow.objective
        );
        assert_eq!(fast.assignment(), slow.assignment(), "trial {trial}");
    }
    let elapsed = start.elapsed();
    criterion(
        8,
        "oracle equivalence",
        elapsed.as_secs_f64() < 60.0,
        format!(
            "200 random instances, worst relative objective gap {worst:.2e}, {:.2} s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_9_conservation_and_monotonicity() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(9);
    let red = vec![TransmitSpec {
        wavelength: Wavelength::Red,
        power_per_module_w: 0.8,
        responsivity_a_per_w: 0.4,
    }];
    for trial in 0..20 {
        let extent = Vec3::new(
            rng.gen_range(2.0..4.0),
            rng.gen_range(2.0..6.0),
            rng.gen_range(2.4..3.2),
        );
        let zero_reflectance = trial % 5 == 0;
        let (wall_r, floor_r) = if zero_reflectance {
            (0.0, 0.0)
        } else {
            (rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9))
        };
        let scene = box_room_scene(BoxRoom {
            extent,
            cf_height_m: rng.gen_range(0.5..extent.z * 0.5),
            wall_reflectance: wall_r,
            floor_reflectance: floor_r,
            element_size_order1_m: rng.gen_range(0.3..0.6),
            element_size_order2_m: rng.gen_range(0.7..1.1),
            ap_positions: vec![Vec3::new(
                rng.gen_range(0.3..extent.x - 0.3),
                rng.gen_range(0.3..extent.y - 0.3),
                extent.z,
            )],
            n_ld_modules: 12,
            wavelengths: red.clone(),
        });
        let ap = &scene.access_points[0];
        let rx = Collector {
            position: Vec3::new(
                rng.gen_range(0.3..extent.x - 0.3),
                rng.gen_range(0.3..extent.y - 0.3),
                scene.cf_height_m,
            ),
            normal: Vec3::UP,
            area_m2: 1e-5,
            fov_semi_angle_rad: std::f64::consts::FRAC_PI_2,
        };
        let trace_at = |order: u8| -> ImpulseResponse {
            let params = ChannelParams {
                max_order: order,
                ..ChannelParams::default()
            };
            trace_impulse_response(&scene, ap, &rx, params).unwrap()
        };
        let ir0 = trace_at(0);
        let ir1 = trace_at(1);
        let ir2 = trace_at(2);
        assert!(ir2.bins.iter().all(|&b| b >= 0.0), "trial {trial}");
        assert!(ir1.dc_gain() >= ir0.dc_gain(), "trial {trial}");
        assert!(ir2.dc_gain() >= ir1.dc_gain(), "trial {trial}");
        if zero_reflectance {
            assert_eq!(ir2, ir0, "trial {trial}: zero reflectance is pure LOS");
        }
    }
    criterion(
        9,
        "conservation and monotonicity",
        true,
        "20 random rooms: nonnegative bins, order-monotone gain, zero-reflectance = LOS".into(),
    );
}

#[test]
fn criterion_10_analytic_bandwidth() {
    let dt = ChannelParams::default().dt_s;
    let gap = (1e-9 / dt).round() as usize;
    let mut bins = vec![0.0; gap + 1];
    bins[0] = 0.5;
    bins[gap] = 0.5;
    let two_tap = ImpulseResponse {
        dt_s: dt,
        t0_s: 0.0,
        bins,
    };
    let bw = bandwidth_3db(&two_tap).unwrap();
    let df = 1.0 / (65536.0 * dt);
    let two_tap_ok = !bw.nyquist_capped && (bw.f3db_hz - 0.25e9).abs() <= df;

    let delta = ImpulseResponse {
        dt_s: dt,
        t0_s: 6.67e-9,
        bins: vec![1e-6],
    };
    let cap = bandwidth_3db(&delta).unwrap();
    let delta_ok = cap.nyquist_capped && (cap.f3db_hz - 50e9).abs() < 1.0;

    criterion(
        10,
        "analytic bandwidth",
        two_tap_ok && delta_ok,
        format!(
            "two-tap 1 ns -> {:.6} GHz (want 0.25 within {:.4} MHz), delta -> capped at {:.0} GHz",
            bw.f3db_hz / 1e9,
            df / 1e6,
            cap.f3db_hz / 1e9
        ),
    );
}

#[test]
fn criterion_11_determinism_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("run");
    let scenario = data_file("scenario2.json");

    let run = |threads: usize| -> BTreeMap<String, Vec<u8>> {
        if root.exists() {
            std::fs::remove_dir_all(&root).unwrap();
        }
        std::fs::create_dir_all(&root).unwrap();
        let db_path = root.join("imr.owcdb");
        cmd_build_db(&BuildDbCmd {
            scene: "fast".into(),
            receiver: ReceiverKind::Imr,
            out: db_path.clone(),
            dt_s: 10e-12,
            max_order: 2,
            threads: Some(threads),
        })
        .unwrap();
        cmd_analyze(&AnalyzeCmd {
            db: db_path.clone(),
            out: root.join("analysis"),
            threads: Some(threads),
        })
        .unwrap();
        cmd_optimize(&OptimizeCmd {
            db: db_path,
            scenario: scenario.clone(),
            sinr_mode: SinrMode::Linear,
            out: root.join("solution"),
        })
        .unwrap();
        collect_files(&root)
    };

    let serial = run(1);
    let parallel = run(8);
    assert_eq!(
        serial.keys().collect::<Vec<_>>(),
        parallel.keys().collect::<Vec<_>>()
    );
    let mut differing = Vec::new();
    for (name, bytes) in &serial {
        if parallel[name] != *bytes {
            differing.push(name.clone());
        }
    }
    criterion(
        11,
        "determinism across thread counts",
        differing.is_empty(),
        format!(
            "{} files compared byte-for-byte (threads 1 vs 8), differing: {:?}",
            serial.len(),
            differing
        ),
    );
}

fn collect_files(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(dir: &Path, root: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(&path, root, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}
