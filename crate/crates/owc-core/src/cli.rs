//! Command implementations behind the `owc` binary: build channel databases,
//! run bandwidth analyses, and solve allocation scenarios.
//!
//! Every command resolves its inputs, computes everything in memory, then
//! writes its outputs followed by a run manifest listing each output file
//! with its SHA-256. Output CSVs name the manifest in a leading comment line.
//! Identical inputs produce byte-identical outputs regardless of the worker
//! thread count.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::allocation::{optimize, AllocationProblem, AllocationReport, Scenario, SinrMode};
use crate::analysis::{bandwidth_cdf, per_record_bandwidth};
use crate::db;
use crate::error::{Error, Result};
use crate::propagation::{build_channel_db, ChannelDb, ChannelParams};
use crate::receivers::{ReceiverKind, ReceiverSpec};
use crate::scene::{default_room_scene, fast_room_scene, SceneConfig};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// `--scene` accepts the bundled scene names or a JSON file path.
pub fn resolve_scene(spec: &str) -> Result<(SceneConfig, String)> {
    match spec {
        "default" => Ok((default_room_scene(), spec.to_string())),
        "fast" => Ok((fast_room_scene(), spec.to_string())),
        path => {
            let scene = SceneConfig::load(Path::new(path))?;
            Ok((scene, path.to_string()))
        }
    }
}

#[derive(Debug, Clone)]
pub struct BuildDbCmd {
    /// Scene name (`paper`, `fast`) or scene file path.
    pub scene: String,
    pub receiver: ReceiverKind,
    pub out: PathBuf,
    pub dt_s: f64,
    pub max_order: u8,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct AnalyzeCmd {
    pub db: PathBuf,
    pub out: PathBuf,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct OptimizeCmd {
    pub db: PathBuf,
    pub scenario: PathBuf,
    pub sinr_mode: SinrMode,
    pub out: PathBuf,
}

/// Run metadata persisted next to every command's outputs. Identical
/// manifests imply byte-identical outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scene: Option<String>,
    pub scene_hash: String,
    pub receiver: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub db: Option<String>,
    pub out: String,
    pub dt_s: f64,
    pub max_time_s: f64,
    pub max_order: u8,
    pub n_ld_modules: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sinr_mode: Option<String>,
    /// All field-of-view angles are semi-angles.
    pub fov_semantics: String,
    /// 3 dB point of |H(f)| relative to |H(0)| on the optical-power response.
    pub bandwidth_convention: String,
    /// CDF takes, per location, the record with the highest DC gain.
    pub cdf_selection: String,
    pub data_rate_rule: String,
    pub outputs: Vec<OutputFile>,
}

#[derive(Debug, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
}

fn manifest_defaults(command: &str, db: &ChannelDb) -> RunManifest {
    RunManifest {
        tool_version: TOOL_VERSION.to_string(),
        command: command.to_string(),
        scene: None,
        scene_hash: hex(&db.scene_hash),
        receiver: db.receiver.kind().name().to_string(),
        scenario: None,
        db: None,
        out: String::new(),
        dt_s: db.params.dt_s,
        max_time_s: db.params.max_time_s,
        max_order: db.params.max_order,
        n_ld_modules: db.access_points.first().map_or(0, |a| a.n_ld_modules),
        sinr_mode: None,
        fov_semantics: "semi-angle".to_string(),
        bandwidth_convention: "optical |H(f)|/|H(0)| at -3 dB".to_string(),
        cdf_selection: "max DC gain over access points and elements".to_string(),
        data_rate_rule: "bandwidth / 0.7, truncated to 0.1 Gbps".to_string(),
        outputs: Vec::new(),
    }
}

/// Traces the scene and persists the channel database plus its manifest.
/// Returns the written file paths.
pub fn cmd_build_db(cmd: &BuildDbCmd) -> Result<Vec<PathBuf>> {
    let (scene, scene_name) = resolve_scene(&cmd.scene)?;
    let receiver = ReceiverSpec::new(cmd.receiver);
    let params = ChannelParams {
        dt_s: cmd.dt_s,
        max_order: cmd.max_order,
        ..ChannelParams::default()
    };
    let db = with_thread_pool(cmd.threads, || {
        build_channel_db(&scene, &receiver, params, &scene.user_locations)
    })??;

    let manifest_name = manifest_name_for(&cmd.out)?;
    let db_bytes = db::to_bytes(&db, Some(&manifest_name))?;

    let mut manifest = manifest_defaults("build-db", &db);
    manifest.scene = Some(scene_name);
    manifest.out = cmd.out.display().to_string();
    manifest.outputs.push(OutputFile {
        file: file_name(&cmd.out)?,
        sha256: hex(&Sha256::digest(&db_bytes)),
    });

    write_atomic(&cmd.out, &db_bytes)?;
    let manifest_path = cmd.out.with_file_name(&manifest_name);
    write_manifest(&manifest_path, &manifest)?;
    Ok(vec![cmd.out.clone(), manifest_path])
}

/// Computes the per-record bandwidth table and the per-location bandwidth
/// CDF for a persisted database.
pub fn cmd_analyze(cmd: &AnalyzeCmd) -> Result<Vec<PathBuf>> {
    let db = db::load(&cmd.db)?;
    let manifest_name = "analyze.manifest.json";

    let (table, cdf) = with_thread_pool(cmd.threads, || -> Result<_> {
        Ok((per_record_bandwidth(&db)?, bandwidth_cdf(&db)?))
    })??;

    let mut bandwidth_csv = format!("# manifest: {manifest_name}\n");
    bandwidth_csv.push_str("location_id,ap_id,element_id,f3db_hz\n");
    for (loc, ap, elem, bw) in &table {
        bandwidth_csv.push_str(&format!("{loc},{ap},{elem},{}\n", bw.f3db_hz));
    }
    let mut cdf_csv = format!("# manifest: {manifest_name}\n");
    cdf_csv.push_str("value_hz,probability\n");
    for (v, p) in cdf.values.iter().zip(&cdf.probabilities) {
        cdf_csv.push_str(&format!("{v},{p}\n"));
    }

    let mut manifest = manifest_defaults("analyze", &db);
    manifest.db = Some(cmd.db.display().to_string());
    manifest.out = cmd.out.display().to_string();

    std::fs::create_dir_all(&cmd.out).map_err(|e| Error::io(&cmd.out, e))?;
    let mut written = Vec::new();
    for (name, content) in [("bandwidth.csv", &bandwidth_csv), ("cdf.csv", &cdf_csv)] {
        let path = cmd.out.join(name);
        manifest.outputs.push(OutputFile {
            file: name.to_string(),
            sha256: hex(&Sha256::digest(content.as_bytes())),
        });
        write_atomic(&path, content.as_bytes())?;
        written.push(path);
    }
    let manifest_path = cmd.out.join(manifest_name);
    write_manifest(&manifest_path, &manifest)?;
    written.push(manifest_path);
    Ok(written)
}

/// Solves a scenario against a persisted database and writes the per-user
/// allocation report.
pub fn cmd_optimize(cmd: &OptimizeCmd) -> Result<Vec<PathBuf>> {
    let db = db::load(&cmd.db)?;
    let scenario = Scenario::load(&cmd.scenario)?;
    let sites = scenario.resolve(&db)?;
    let problem = AllocationProblem::new(&db, sites, cmd.sinr_mode)?;
    let report = optimize(&problem)?;

    let manifest_name = "optimize.manifest.json";
    let report_csv = report_csv(&report, manifest_name);

    let mut manifest = manifest_defaults("optimize", &db);
    manifest.db = Some(cmd.db.display().to_string());
    manifest.scenario = Some(cmd.scenario.display().to_string());
    manifest.sinr_mode = Some(cmd.sinr_mode.name().to_string());
    manifest.out = cmd.out.display().to_string();
    manifest.outputs.push(OutputFile {
        file: "report.csv".to_string(),
        sha256: hex(&Sha256::digest(report_csv.as_bytes())),
    });

    std::fs::create_dir_all(&cmd.out).map_err(|e| Error::io(&cmd.out, e))?;
    let report_path = cmd.out.join("report.csv");
    write_atomic(&report_path, report_csv.as_bytes())?;
    let manifest_path = cmd.out.join(manifest_name);
    write_manifest(&manifest_path, &manifest)?;
    Ok(vec![report_path, manifest_path])
}

fn report_csv(report: &AllocationReport, manifest_name: &str) -> String {
    let mut out = format!("# manifest: {manifest_name}\n");
    out.push_str("user,ap,wavelength,element,sinr_db,bandwidth_hz,rate_bps\n");
    for u in &report.users {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            u.user_id,
            u.ap_id,
            u.wavelength,
            u.element_id,
            u.sinr.sinr_db,
            u.bandwidth.f3db_hz,
            u.data_rate_bps
        ));
    }
    out
}

/// Runs `f` on a dedicated pool of `threads` workers, or inline on the
/// global pool.
pub fn with_thread_pool<T>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T>
where
    T: Send,
{
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Channel(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn manifest_name_for(db_path: &Path) -> Result<String> {
    Ok(format!("{}.manifest.json", file_name(db_path)?))
}

fn file_name(path: &Path) -> Result<String> {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .ok_or_else(|| Error::parse(path, "path has no file name"))
}

fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<()> {
    let mut json = serde_json::to_string_pretty(manifest)
        .map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    json.push('\n');
    write_atomic(path, json.as_bytes())
}

/// Writes via a sibling temp file and rename, so failures never leave a
/// partially written output in place.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
