//! C ABI over the indoor optical wireless channel simulator: opaque handles,
//! integer status codes, and a thread-local last-error message.
//!
//! Handles returned by `owc_*` constructors own their data and must be
//! released with the matching `*_free` function. All functions are safe to
//! call from multiple threads as long as a handle is not freed while in use;
//! error messages are per-thread. The generated header lives in
//! `include/owc.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use owc_core::allocation::{optimize, AllocationProblem, AllocationReport, Scenario, SinrMode};
use owc_core::analysis::bandwidth_3db;
use owc_core::cli::with_thread_pool;
use owc_core::propagation::{build_channel_db, ChannelDb, ChannelParams};
use owc_core::receivers::{ReceiverKind, ReceiverSpec};
use owc_core::scene::{default_room_scene, fast_room_scene, SceneConfig};

/// Opaque room/scene handle.
pub struct OwcScene(SceneConfig);

/// Opaque channel-database handle.
pub struct OwcDb(ChannelDb);

/// Opaque allocation-report handle.
pub struct OwcReport(AllocationReport);

/// Call outcome. Anything other than `OK` leaves a message readable via
/// `owc_last_error`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OwcStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Inputs were structurally valid but violate a model rule.
    InvalidArgument = 2,
    Io = 3,
    /// A file or JSON document could not be parsed.
    Parse = 4,
    /// The assignment problem has no valid solution.
    Infeasible = 5,
    /// Unexpected internal failure.
    Internal = 6,
}

/// Receiver front end selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OwcReceiver {
    /// Four-branch angle-diversity receiver.
    Adr = 0,
    /// 3x3-pixel imaging receiver.
    Imr = 1,
}

/// One allocated user from an optimization report. `wavelength` indexes
/// red = 0, yellow = 1, green = 2, blue = 3.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct OwcUserRow {
    pub user_id: u32,
    pub ap_id: u32,
    pub wavelength: u32,
    pub element_id: u32,
    pub sinr_db: f64,
    pub bandwidth_hz: f64,
    pub data_rate_bps: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(err: owc_core::Error) -> OwcStatus {
    let status = match err.category() {
        "io" => OwcStatus::Io,
        "parse" | "db" | "scene" => OwcStatus::Parse,
        "infeasible" => OwcStatus::Infeasible,
        _ => OwcStatus::InvalidArgument,
    };
    set_error(&err.to_string());
    status
}

fn guarded(f: impl FnOnce() -> OwcStatus) -> OwcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            OwcStatus::Internal
        }
    }
}

/// # Safety
/// `ptr` must be null or a NUL-terminated string valid for the call.
unsafe fn utf8<'a>(ptr: *const c_char) -> Result<&'a str, OwcStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(OwcStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        OwcStatus::InvalidArgument
    })
}

/// Version of the library as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn owc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the current thread's last error message into `buf` (truncated to
/// `cap` - 1 bytes, always NUL-terminated when `cap` > 0) and returns the
/// full message length in bytes. Call with a null `buf` to query the length.
///
/// # Safety
/// `buf` must be null or valid for `cap` bytes of writes.
#[no_mangle]
pub unsafe extern "C" fn owc_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Builds the bundled full-resolution reference room.
#[no_mangle]
pub extern "C" fn owc_scene_default_room() -> *mut OwcScene {
    Box::into_raw(Box::new(OwcScene(default_room_scene())))
}

/// Builds the bundled coarse-element room for fast runs.
#[no_mangle]
pub extern "C" fn owc_scene_fast_room() -> *mut OwcScene {
    Box::into_raw(Box::new(OwcScene(fast_room_scene())))
}

/// Parses a scene from its JSON form. Returns null on failure (see
/// `owc_last_error`).
///
/// # Safety
/// `json` must be a NUL-terminated string valid for the call.
#[no_mangle]
pub unsafe extern "C" fn owc_scene_from_json(json: *const c_char) -> *mut OwcScene {
    let text = match utf8(json) {
        Ok(t) => t,
        Err(_) => return std::ptr::null_mut(),
    };
    match SceneConfig::from_json_str(text) {
        Ok(scene) => Box::into_raw(Box::new(OwcScene(scene))),
        Err(e) => {
            fail(e);
            std::ptr::null_mut()
        }
    }
}

/// # Safety
/// `scene` must be null or a pointer from an `owc_scene_*` constructor that
/// has not been freed.
#[no_mangle]
pub unsafe extern "C" fn owc_scene_free(scene: *mut OwcScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// Writes the scene's 64-character hex hash (plus NUL) into `buf`.
///
/// # Safety
/// `scene` must be a live scene handle; `buf` must be valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn owc_scene_hash_hex(
    scene: *const OwcScene,
    buf: *mut c_char,
    cap: usize,
) -> OwcStatus {
    if scene.is_null() || buf.is_null() {
        set_error("null argument");
        return OwcStatus::NullArgument;
    }
    if cap < 65 {
        set_error("hash buffer needs 65 bytes");
        return OwcStatus::InvalidArgument;
    }
    let hex = (*scene).0.hash_hex();
    std::ptr::copy_nonoverlapping(hex.as_ptr() as *const c_char, buf, 64);
    *buf.add(64) = 0;
    OwcStatus::Ok
}

/// Traces the channel database for every location of the scene.
/// `max_order` is the highest reflection order (0..=2), `dt_s` the impulse
/// response bin width in seconds (pass 0 for the 10 ps default), `threads`
/// the worker count (0 uses all cores).
///
/// # Safety
/// `scene` must be a live scene handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn owc_db_build(
    scene: *const OwcScene,
    receiver: OwcReceiver,
    max_order: u32,
    dt_s: f64,
    threads: u32,
    out: *mut *mut OwcDb,
) -> OwcStatus {
    if scene.is_null() || out.is_null() {
        set_error("null argument");
        return OwcStatus::NullArgument;
    }
    let scene = &(*scene).0;
    guarded(|| {
        let kind = match receiver {
            OwcReceiver::Adr => ReceiverKind::Adr,
            OwcReceiver::Imr => ReceiverKind::Imr,
        };
        let params = ChannelParams {
            dt_s: if dt_s > 0.0 {
                dt_s
            } else {
                ChannelParams::default().dt_s
            },
            max_order: max_order.min(u8::MAX as u32) as u8,
            ..ChannelParams::default()
        };
        let spec = ReceiverSpec::new(kind);
        let pool = if threads == 0 {
            None
        } else {
            Some(threads as usize)
        };
        let built = with_thread_pool(pool, || {
            build_channel_db(scene, &spec, params, &scene.user_locations)
        })
        .and_then(|r| r);
        match built {
            Ok(db) => {
                *out = Box::into_raw(Box::new(OwcDb(db)));
                OwcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Loads a channel database file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn owc_db_load(path: *const c_char, out: *mut *mut OwcDb) -> OwcStatus {
    if out.is_null() {
        set_error("null output argument");
        return OwcStatus::NullArgument;
    }
    let path = match utf8(path) {
        Ok(p) => PathBuf::from(p),
        Err(status) => return status,
    };
    guarded(|| match owc_core::db::load(&path) {
        Ok(db) => {
            *out = Box::into_raw(Box::new(OwcDb(db)));
            OwcStatus::Ok
        }
        Err(e) => fail(e),
    })
}

/// Persists a channel database.
///
/// # Safety
/// `db` must be a live database handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn owc_db_save(db: *const OwcDb, path: *const c_char) -> OwcStatus {
    if db.is_null() {
        set_error("null database argument");
        return OwcStatus::NullArgument;
    }
    let path = match utf8(path) {
        Ok(p) => PathBuf::from(p),
        Err(status) => return status,
    };
    guarded(|| match owc_core::db::save(&(*db).0, &path, None) {
        Ok(()) => OwcStatus::Ok,
        Err(e) => fail(e),
    })
}

/// # Safety
/// `db` must be null or a live database handle.
#[no_mangle]
pub unsafe extern "C" fn owc_db_free(db: *mut OwcDb) {
    if !db.is_null() {
        drop(Box::from_raw(db));
    }
}

/// Number of (location, access point, element) records.
///
/// # Safety
/// `db` must be a live database handle.
#[no_mangle]
pub unsafe extern "C" fn owc_db_record_count(db: *const OwcDb) -> u32 {
    if db.is_null() {
        return 0;
    }
    (*db).0.records.len() as u32
}

/// DC gain of one channel record (1-based ids).
///
/// # Safety
/// `db` must be a live database handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn owc_db_dc_gain(
    db: *const OwcDb,
    location_id: u32,
    ap_id: u32,
    element_id: u32,
    out: *mut f64,
) -> OwcStatus {
    if db.is_null() || out.is_null() {
        set_error("null argument");
        return OwcStatus::NullArgument;
    }
    match (*db).0.record(location_id, ap_id, element_id) {
        Ok(rec) => {
            *out = rec.dc_gain;
            OwcStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// 3 dB bandwidth of one channel record. `nyquist_capped` is set when the
/// response never falls 3 dB below DC within the representable band.
///
/// # Safety
/// `db` must be a live database handle; output pointers valid for writes.
#[no_mangle]
pub unsafe extern "C" fn owc_db_bandwidth(
    db: *const OwcDb,
    location_id: u32,
    ap_id: u32,
    element_id: u32,
    f3db_hz: *mut f64,
    nyquist_capped: *mut bool,
) -> OwcStatus {
    if db.is_null() || f3db_hz.is_null() || nyquist_capped.is_null() {
        set_error("null argument");
        return OwcStatus::NullArgument;
    }
    guarded(|| {
        let rec = match (*db).0.record(location_id, ap_id, element_id) {
            Ok(rec) => rec,
            Err(e) => return fail(e),
        };
        match bandwidth_3db(&rec.ir) {
            Ok(bw) => {
                *f3db_hz = bw.f3db_hz;
                *nyquist_capped = bw.nyquist_capped;
                OwcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Solves the allocation problem for the users of a scenario JSON document
/// (same schema as the CLI scenario files) against this database.
/// `squared_mode` selects the electrical-domain SINR variant.
///
/// # Safety
/// `db` must be a live database handle; `scenario_json` a NUL-terminated
/// string; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn owc_optimize(
    db: *const OwcDb,
    scenario_json: *const c_char,
    squared_mode: bool,
    out: *mut *mut OwcReport,
) -> OwcStatus {
    if db.is_null() || out.is_null() {
        set_error("null argument");
        return OwcStatus::NullArgument;
    }
    let text = match utf8(scenario_json) {
        Ok(t) => t,
        Err(status) => return status,
    };
    let db = &(*db).0;
    guarded(|| {
        let solved = (|| {
            let scenario = Scenario::from_json_str(text)?;
            let sites = scenario.resolve(db)?;
            let mode = if squared_mode {
                SinrMode::Squared
            } else {
                SinrMode::Linear
            };
            let problem = AllocationProblem::new(db, sites, mode)?;
            optimize(&problem)
        })();
        match solved {
            Ok(report) => {
                *out = Box::into_raw(Box::new(OwcReport(report)));
                OwcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn owc_report_free(report: *mut OwcReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `report` must be a live report handle.
#[no_mangle]
pub unsafe extern "C" fn owc_report_user_count(report: *const OwcReport) -> u32 {
    if report.is_null() {
        return 0;
    }
    (*report).0.users.len() as u32
}

/// Sum of per-user linear SINRs (the optimization objective).
///
/// # Safety
/// `report` must be a live report handle.
#[no_mangle]
pub unsafe extern "C" fn owc_report_objective(report: *const OwcReport) -> f64 {
    if report.is_null() {
        return f64::NAN;
    }
    (*report).0.objective
}

/// Copies one allocated user (0-based `index`) into `out`.
///
/// # Safety
/// `report` must be a live report handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn owc_report_user(
    report: *const OwcReport,
    index: u32,
    out: *mut OwcUserRow,
) -> OwcStatus {
    if report.is_null() || out.is_null() {
        set_error("null argument");
        return OwcStatus::NullArgument;
    }
    let users = &(*report).0.users;
    match users.get(index as usize) {
        Some(u) => {
            *out = OwcUserRow {
                user_id: u.user_id,
                ap_id: u.ap_id,
                wavelength: u.wavelength.index() as u32,
                element_id: u.element_id,
                sinr_db: u.sinr.sinr_db,
                bandwidth_hz: u.bandwidth.f3db_hz,
                data_rate_bps: u.data_rate_bps,
            };
            OwcStatus::Ok
        }
        None => {
            set_error("user index out of range");
            OwcStatus::InvalidArgument
        }
    }
}
