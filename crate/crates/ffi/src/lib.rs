//! C ABI for the boundary tracking simulator.
//!
//! The surface is a small handle-based API: a [`BtScenario`] wraps scenario
//! TOML text plus accumulated `section.key=value` overrides, and a
//! [`BtTrace`] wraps one finished simulation run. Handles are opaque — C
//! callers only ever hold pointers — and every object returned by this
//! library must be released with its matching `bt_*_free` function.
//!
//! Conventions:
//! - fallible calls return a [`BtStatus`]; on anything but `BT_STATUS_OK`
//!   a human-readable message is available through [`bt_last_error`] until
//!   the next call on the same thread,
//! - output parameters are written only on success,
//! - passing a null pointer is reported as `BT_STATUS_NULL_ARGUMENT`, never
//!   undefined behavior,
//! - strings are NUL-terminated UTF-8; strings returned as `char*` are owned
//!   by the caller and released with [`bt_string_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::fs::File;
use std::io::BufWriter;
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use boundary_tracking::engine::{self, SimTrace};
use boundary_tracking::limited_range::{necessary_bounds, sufficient_bounds};
use boundary_tracking::scenario::{parse_scenario, BuiltScenario, ScenarioError};

/// Result of a fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BtStatus {
    /// the call succeeded and output parameters are valid
    Ok = 0,
    /// a required pointer argument was null
    NullArgument = 1,
    /// a string argument was not valid UTF-8
    Utf8 = 2,
    /// the scenario text is not valid TOML for the schema
    Parse = 3,
    /// the scenario parsed but failed validation (geometry, ranges, ...)
    Invalid = 4,
    /// the simulation itself failed (order violation, degenerate filter)
    Runtime = 5,
    /// a file could not be written
    Io = 6,
    /// an internal invariant failed; the library state is still consistent
    Panic = 7,
}

/// A parsed-on-demand scenario: TOML text plus validated overrides.
pub struct BtScenario {
    text: String,
    overrides: Vec<String>,
}

/// A finished simulation run (per-step records plus the summary).
pub struct BtTrace {
    trace: SimTrace,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(clean).expect("interior NULs were replaced");
    });
}

fn fail(status: BtStatus, msg: &str) -> BtStatus {
    set_error(msg);
    status
}

fn scenario_status(err: &ScenarioError) -> BtStatus {
    match err {
        ScenarioError::Parse(_) => BtStatus::Parse,
        ScenarioError::Engine(_) => BtStatus::Runtime,
        _ => BtStatus::Invalid,
    }
}

/// Run `f` with panics converted to `BT_STATUS_PANIC` so no unwind ever
/// crosses the C boundary.
fn guarded(f: impl FnOnce() -> BtStatus) -> BtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(BtStatus::Panic, "internal panic; see stderr for details"),
    }
}

/// # Safety
/// `s` must be null or a NUL-terminated string.
unsafe fn utf8_arg<'a>(s: *const c_char, name: &str) -> Result<&'a str, BtStatus> {
    if s.is_null() {
        return Err(fail(BtStatus::NullArgument, &format!("{name} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(BtStatus::Utf8, &format!("{name} is not valid UTF-8")))
}

fn build_scenario(sc: &BtScenario, seed: u64) -> Result<BuiltScenario, BtStatus> {
    let file = parse_scenario(&sc.text, &sc.overrides)
        .map_err(|e| fail(scenario_status(&e), &e.to_string()))?;
    let seed = file.run.seed.unwrap_or(seed);
    file.build(seed).map_err(|e| fail(scenario_status(&e), &e.to_string()))
}

/// Library version as a static NUL-terminated string; never freed.
#[no_mangle]
pub extern "C" fn bt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next `bt_*` call on the same thread; never freed
/// by the caller.
#[no_mangle]
pub extern "C" fn bt_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parse scenario TOML into a new handle. On success `*out` owns the
/// scenario and must be released with `bt_scenario_free`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bt_scenario_from_toml(
    text: *const c_char,
    out: *mut *mut BtScenario,
) -> BtStatus {
    guarded(|| {
        if out.is_null() {
            return fail(BtStatus::NullArgument, "out is null");
        }
        let text = match utf8_arg(text, "text") {
            Ok(t) => t.to_owned(),
            Err(status) => return status,
        };
        if let Err(e) = parse_scenario(&text, &[]) {
            return fail(scenario_status(&e), &e.to_string());
        }
        *out = Box::into_raw(Box::new(BtScenario { text, overrides: Vec::new() }));
        BtStatus::Ok
    })
}

/// Override one scenario key, e.g. key `"run.max_steps"`, value `"200"`.
/// The override is validated against the schema immediately and retained
/// only if the scenario still parses; on error the scenario is unchanged.
///
/// # Safety
/// `sc` must come from `bt_scenario_from_toml`; `key` and `value` must be
/// NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn bt_scenario_set(
    sc: *mut BtScenario,
    key: *const c_char,
    value: *const c_char,
) -> BtStatus {
    guarded(|| {
        let Some(sc) = sc.as_mut() else {
            return fail(BtStatus::NullArgument, "scenario is null");
        };
        let key = match utf8_arg(key, "key") {
            Ok(k) => k,
            Err(status) => return status,
        };
        let value = match utf8_arg(value, "value") {
            Ok(v) => v,
            Err(status) => return status,
        };
        let mut trial = sc.overrides.clone();
        trial.push(format!("{key}={value}"));
        match parse_scenario(&sc.text, &trial) {
            Ok(_) => {
                sc.overrides = trial;
                BtStatus::Ok
            }
            Err(e) => fail(scenario_status(&e), &e.to_string()),
        }
    })
}

/// Release a scenario handle. Null is a no-op.
///
/// # Safety
/// `sc` must be null or an unreleased pointer from `bt_scenario_from_toml`.
#[no_mangle]
pub unsafe extern "C" fn bt_scenario_free(sc: *mut BtScenario) {
    if !sc.is_null() {
        drop(Box::from_raw(sc));
    }
}

/// Run one simulation. `seed` may be null, in which case the scenario's
/// `run.seed` is used, or a fresh seed is drawn if the file has none; a
/// non-null `seed` always wins. On success `*out` owns the trace and must
/// be released with `bt_trace_free`.
///
/// # Safety
/// `sc` must come from `bt_scenario_from_toml`; `seed` must be null or
/// valid; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bt_run(
    sc: *const BtScenario,
    seed: *const u64,
    out: *mut *mut BtTrace,
) -> BtStatus {
    guarded(|| {
        let Some(sc) = sc.as_ref() else {
            return fail(BtStatus::NullArgument, "scenario is null");
        };
        if out.is_null() {
            return fail(BtStatus::NullArgument, "out is null");
        }
        let file = match parse_scenario(&sc.text, &sc.overrides) {
            Ok(f) => f,
            Err(e) => return fail(scenario_status(&e), &e.to_string()),
        };
        let resolved = match seed.as_ref() {
            Some(&s) => s,
            None => file.run.seed.unwrap_or_else(rand::random),
        };
        let built = match file.build(resolved) {
            Ok(b) => b,
            Err(e) => return fail(scenario_status(&e), &e.to_string()),
        };
        match engine::run(&built.config) {
            Ok(trace) => {
                *out = Box::into_raw(Box::new(BtTrace { trace }));
                BtStatus::Ok
            }
            Err(e) => fail(BtStatus::Runtime, &e.to_string()),
        }
    })
}

/// Release a trace handle. Null is a no-op.
///
/// # Safety
/// `tr` must be null or an unreleased pointer from `bt_run`.
#[no_mangle]
pub unsafe extern "C" fn bt_trace_free(tr: *mut BtTrace) {
    if !tr.is_null() {
        drop(Box::from_raw(tr));
    }
}

/// Number of logged records (initial state plus one per executed step);
/// 0 for a null trace.
///
/// # Safety
/// `tr` must be null or a pointer from `bt_run`.
#[no_mangle]
pub unsafe extern "C" fn bt_trace_steps(tr: *const BtTrace) -> usize {
    tr.as_ref().map_or(0, |t| t.trace.records.len())
}

/// First record index with the convergence error below threshold, or -1
/// if the run never converged (or the trace is null).
///
/// # Safety
/// `tr` must be null or a pointer from `bt_run`.
#[no_mangle]
pub unsafe extern "C" fn bt_trace_ctime(tr: *const BtTrace) -> i64 {
    tr.as_ref()
        .and_then(|t| t.trace.summary.ctime)
        .map_or(-1, |k| k as i64)
}

/// Whether the run reached the convergence threshold within its horizon.
///
/// # Safety
/// `tr` must be null or a pointer from `bt_run`.
#[no_mangle]
pub unsafe extern "C" fn bt_trace_converged(tr: *const BtTrace) -> bool {
    tr.as_ref().is_some_and(|t| t.trace.summary.converged)
}

/// Messages per robot per step up to convergence; NaN for a null trace.
///
/// # Safety
/// `tr` must be null or a pointer from `bt_run`.
#[no_mangle]
pub unsafe extern "C" fn bt_trace_com_bar(tr: *const BtTrace) -> f64 {
    tr.as_ref().map_or(f64::NAN, |t| t.trace.summary.com_bar)
}

/// Convergence error at record `k`; NaN when `k` is out of range or the
/// trace is null.
///
/// # Safety
/// `tr` must be null or a pointer from `bt_run`.
#[no_mangle]
pub unsafe extern "C" fn bt_trace_cerr_at(tr: *const BtTrace, k: usize) -> f64 {
    tr.as_ref()
        .and_then(|t| t.trace.records.get(k))
        .map_or(f64::NAN, |r| r.cerr)
}

/// Estimation error at record `k`; NaN when `k` is out of range or the
/// trace is null.
///
/// # Safety
/// `tr` must be null or a pointer from `bt_run`.
#[no_mangle]
pub unsafe extern "C" fn bt_trace_terr_at(tr: *const BtTrace, k: usize) -> f64 {
    tr.as_ref()
        .and_then(|t| t.trace.records.get(k))
        .map_or(f64::NAN, |r| r.terr)
}

/// Seed the run was executed with (0 for a null trace).
///
/// # Safety
/// `tr` must be null or a pointer from `bt_run`.
#[no_mangle]
pub unsafe extern "C" fn bt_trace_seed(tr: *const BtTrace) -> u64 {
    tr.as_ref().map_or(0, |t| t.trace.summary.seed)
}

/// Write the per-step trace as CSV to `path` (UTF-8).
///
/// # Safety
/// `tr` must come from `bt_run`; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bt_trace_write_csv(
    tr: *const BtTrace,
    path: *const c_char,
) -> BtStatus {
    guarded(|| {
        let Some(tr) = tr.as_ref() else {
            return fail(BtStatus::NullArgument, "trace is null");
        };
        let path = match utf8_arg(path, "path") {
            Ok(p) => p,
            Err(status) => return status,
        };
        let file = match File::create(path) {
            Ok(f) => f,
            Err(e) => return fail(BtStatus::Io, &format!("cannot create {path}: {e}")),
        };
        match engine::write_csv(&tr.trace, &mut BufWriter::new(file)) {
            Ok(()) => BtStatus::Ok,
            Err(e) => fail(BtStatus::Io, &format!("cannot write {path}: {e}")),
        }
    })
}

/// Run summary as a JSON object (steps, ctime, converged, com_bar,
/// final_cerr, mean_terr, seed). Returns an owned string to release with
/// `bt_string_free`, or null on error.
///
/// # Safety
/// `tr` must be null or a pointer from `bt_run`.
#[no_mangle]
pub unsafe extern "C" fn bt_trace_summary_json(tr: *const BtTrace) -> *mut c_char {
    let Some(tr) = tr.as_ref() else {
        set_error("trace is null");
        return ptr::null_mut();
    };
    match serde_json::to_string(&tr.trace.summary) {
        Ok(json) => CString::new(json).expect("JSON has no interior NULs").into_raw(),
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// Release a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must be null or an unreleased string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn bt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Resolved angular speed bound for the scenario: the fixed value, or the
/// worst-case geometric bound when the scenario computes it.
///
/// # Safety
/// `sc` must come from `bt_scenario_from_toml`; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bt_omega_max(sc: *const BtScenario, out: *mut f64) -> BtStatus {
    guarded(|| {
        let Some(sc) = sc.as_ref() else {
            return fail(BtStatus::NullArgument, "scenario is null");
        };
        if out.is_null() {
            return fail(BtStatus::NullArgument, "out is null");
        }
        match build_scenario(sc, 0) {
            Ok(built) => {
                *out = built.config.omega_max;
                BtStatus::Ok
            }
            Err(status) => status,
        }
    })
}

/// Communication/sensing range feasibility bounds for the scenario's
/// polygon and team size: below the necessary bounds the task is
/// infeasible, at the sufficient bounds the limited-range strategy is
/// guaranteed to work. Any output pointer may be null to skip that value.
///
/// # Safety
/// `sc` must come from `bt_scenario_from_toml`; non-null outputs must be
/// valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bt_range_bounds(
    sc: *const BtScenario,
    necessary_rc: *mut f64,
    necessary_rs: *mut f64,
    sufficient_rc: *mut f64,
    sufficient_rs: *mut f64,
) -> BtStatus {
    guarded(|| {
        let Some(sc) = sc.as_ref() else {
            return fail(BtStatus::NullArgument, "scenario is null");
        };
        let built = match build_scenario(sc, 0) {
            Ok(b) => b,
            Err(status) => return status,
        };
        let nec = necessary_bounds(&built.config.polygon, built.config.n_robots);
        let suf = sufficient_bounds(&built.config.polygon, built.config.n_robots);
        if let Some(out) = necessary_rc.as_mut() {
            *out = nec.r_c;
        }
        if let Some(out) = necessary_rs.as_mut() {
            *out = nec.r_s;
        }
        if let Some(out) = sufficient_rc.as_mut() {
            *out = suf.r_c;
        }
        if let Some(out) = sufficient_rs.as_mut() {
            *out = suf.r_s;
        }
        BtStatus::Ok
    })
}
