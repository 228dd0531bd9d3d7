//! End-to-end checks of the command layer: reproducible outputs, error
//! categories with file context, and the binary's exit behaviour.

mod common;

use std::process::Command;

use common::data_file;
use owc_core::allocation::SinrMode;
use owc_core::cli::{
    cmd_analyze, cmd_build_db, cmd_optimize, resolve_scene, AnalyzeCmd, BuildDbCmd, OptimizeCmd,
};
use owc_core::receivers::ReceiverKind;
use owc_core::scene::SceneConfig;

fn build_fast_db(dir: &std::path::Path, receiver: ReceiverKind) -> std::path::PathBuf {
    let out = dir.join(format!("{receiver}.owcdb"));
    cmd_build_db(&BuildDbCmd {
        scene: "fast".into(),
        receiver,
        out: out.clone(),
        dt_s: 10e-12,
        max_order: 2,
        threads: None,
    })
    .unwrap();
    out
}

#[test]
fn rebuild_with_same_inputs_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let db_path = build_fast_db(dir.path(), ReceiverKind::Adr);
    let first = std::fs::read(&db_path).unwrap();
    let again = build_fast_db(dir.path(), ReceiverKind::Adr);
    let second = std::fs::read(&again).unwrap();
    assert_eq!(first, second);
}

#[test]
fn analysis_outputs_reference_their_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let db_path = build_fast_db(dir.path(), ReceiverKind::Imr);
    let out = dir.path().join("analysis");
    let written = cmd_analyze(&AnalyzeCmd {
        db: db_path,
        out: out.clone(),
        threads: None,
    })
    .unwrap();
    assert_eq!(written.len(), 3);
    for name in ["bandwidth.csv", "cdf.csv"] {
        let text = std::fs::read_to_string(out.join(name)).unwrap();
        assert!(text.starts_with("# manifest: analyze.manifest.json\n"));
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("analyze.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);
    assert_eq!(manifest["receiver"], "imr");
}

#[test]
fn optimize_report_has_one_row_per_user() {
    let dir = tempfile::tempdir().unwrap();
    let db_path = build_fast_db(dir.path(), ReceiverKind::Imr);
    let out = dir.path().join("solution");
    cmd_optimize(&OptimizeCmd {
        db: db_path,
        scenario: data_file("scenario1.json"),
        sinr_mode: SinrMode::Linear,
        out: out.clone(),
    })
    .unwrap();
    let text = std::fs::read_to_string(out.join("report.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# manifest:"));
    assert_eq!(
        lines.next().unwrap(),
        "user,ap,wavelength,element,sinr_db,bandwidth_hz,rate_bps"
    );
    assert_eq!(lines.count(), 8);
}

#[test]
fn corrupt_scene_file_names_the_offending_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");

    // Structurally valid JSON with an out-of-range reflectance.
    let mut scene = resolve_scene("fast").unwrap().0;
    scene.surfaces[2].reflectance = 2.5;
    let json = serde_json::to_string(&scene).unwrap();
    std::fs::write(&path, json).unwrap();
    let err = SceneConfig::load(&path).unwrap_err();
    assert_eq!(err.category(), "parse");
    assert!(err.to_string().contains("reflectance"), "{err}");

    // Malformed JSON reports position context.
    std::fs::write(&path, "{ \"extent\": ").unwrap();
    let err = SceneConfig::load(&path).unwrap_err();
    assert_eq!(err.category(), "parse");
    assert!(err.to_string().contains("line"), "{err}");
}

#[test]
fn unknown_scenario_location_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let db_path = build_fast_db(dir.path(), ReceiverKind::Adr);
    let scenario = dir.path().join("strayed.json");
    std::fs::write(
        &scenario,
        r#"{"users":[{"id":1,"location":{"x":0.51,"y":0.5,"z":1.0}}]}"#,
    )
    .unwrap();
    let err = cmd_optimize(&OptimizeCmd {
        db: db_path,
        scenario,
        sinr_mode: SinrMode::Linear,
        out: dir.path().join("out"),
    })
    .unwrap_err();
    assert_eq!(err.category(), "allocation");
    assert!(err.to_string().contains("not in the channel database"));
}

#[test]
fn missing_database_is_an_io_error() {
    let err = cmd_analyze(&AnalyzeCmd {
        db: "/nonexistent/owc.owcdb".into(),
        out: "/tmp".into(),
        threads: None,
    })
    .unwrap_err();
    assert_eq!(err.category(), "io");
}

#[test]
fn binary_exit_codes_and_error_lines() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cli.owcdb");
    let ok = Command::new(env!("CARGO_BIN_EXE_owc"))
        .args([
            "build-db",
            "--scene",
            "fast",
            "--receiver",
            "adr",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(ok.status.success(), "{ok:?}");
    assert!(out.exists());

    let bad = Command::new(env!("CARGO_BIN_EXE_owc"))
        .args([
            "analyze",
            "--db",
            dir.path().join("absent.owcdb").to_str().unwrap(),
            "--out",
            dir.path().join("x").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!bad.status.success());
    let stderr = String::from_utf8_lossy(&bad.stderr);
    assert!(stderr.starts_with("error[io]:"), "stderr: {stderr}");
}

#[test]
fn env_overrides_supply_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("env.owcdb");
    let run = Command::new(env!("CARGO_BIN_EXE_owc"))
        .args(["build-db", "--receiver", "adr"])
        .env("OWC_SCENE", "fast")
        .env("OWC_OUT", out.to_str().unwrap())
        .env("OWC_ORDERS", "1")
        .output()
        .unwrap();
    assert!(run.status.success(), "{run:?}");
    let db = owc_core::db::load(&out).unwrap();
    assert_eq!(db.params.max_order, 1);
}
