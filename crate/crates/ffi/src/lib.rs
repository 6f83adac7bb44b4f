//! C interface to `evac-core`.
//!
//! Objects are opaque handles created by `*_load`/`*_parse`/`evac_run`/
//! `evac_optimize` and released with the matching `*_free`. Every fallible
//! call returns an [`EvacStatus`]; on failure the message is available from
//! [`evac_last_error_message`] on the same thread. Panics never cross the
//! boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use evac_core::engine::{run_evacuation, EngineError, RunResult};
use evac_core::io::duration::{parse_duration, DurationMs};
use evac_core::io::scenario_file::{load_scenario, parse_scenario, ScenarioFile};
use evac_core::optimizer::{optimize, OptimizationReport, OptimizeOptions, OptimizerError};
use evac_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvacStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Validation = 4,
    Io = 5,
    Runtime = 6,
    Timeout = 7,
    OutOfRange = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

/// A loaded, validated scenario.
pub struct EvacScenario(ScenarioFile);

/// Per-agent outcome of one run.
pub struct EvacRunResult(RunResult);

/// Ranked candidate locations from one optimization.
pub struct EvacReport(OptimizationReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(e: &Error) -> EvacStatus {
    match e {
        Error::Parse { .. } | Error::Csv { .. } | Error::Duration(_) => EvacStatus::Parse,
        Error::Io { .. } => EvacStatus::Io,
        Error::Engine(EngineError::Timeout { .. }) => EvacStatus::Timeout,
        Error::Optimizer(OptimizerError::InvalidSpec(_) | OptimizerError::TooFewPositions { .. }) => {
            EvacStatus::Validation
        }
        e if e.exit_status() == 2 => EvacStatus::Validation,
        _ => EvacStatus::Runtime,
    }
}

fn fail(status: EvacStatus, message: impl Into<String>) -> EvacStatus {
    set_error(message);
    status
}

fn guard(f: impl FnOnce() -> EvacStatus) -> EvacStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(EvacStatus::Panic, "internal panic"),
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, EvacStatus> {
    if p.is_null() {
        return Err(fail(EvacStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(EvacStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn store<T>(out: *mut *mut T, value: Result<T, Error>) -> EvacStatus {
    match value {
        Ok(v) => {
            *out = Box::into_raw(Box::new(v));
            EvacStatus::Ok
        }
        Err(e) => fail(status_of(&e), e.to_string()),
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(EvacStatus::NullPointer, concat!(stringify!($p), " is null"));
        })+
    };
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn evac_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Loads a scenario file, or a bundled scenario by name.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evac_scenario_load(path: *const c_char, out: *mut *mut EvacScenario) -> EvacStatus {
    guard(|| {
        non_null!(out);
        let path = match text(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        store(out, load_scenario(path).map(EvacScenario))
    })
}

/// Parses scenario text.
///
/// # Safety
/// `source` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evac_scenario_parse(source: *const c_char, out: *mut *mut EvacScenario) -> EvacStatus {
    guard(|| {
        non_null!(out);
        let source = match text(source, "source") {
            Ok(s) => s,
            Err(s) => return s,
        };
        store(out, parse_scenario(source, Path::new("<memory>")).map(EvacScenario))
    })
}

/// # Safety
/// `scenario` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn evac_scenario_free(scenario: *mut EvacScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Number of agents after group expansion; 0 for null.
///
/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn evac_scenario_agent_count(scenario: *const EvacScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.0.scenario.starts().count())
}

/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn evac_scenario_exit_count(scenario: *const EvacScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.0.scenario.area().exits.len())
}

/// Seed stored in the scenario file.
///
/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn evac_scenario_seed(scenario: *const EvacScenario) -> u64 {
    scenario.as_ref().map_or(0, |s| s.0.scenario.scenario().seed)
}

/// Simulates the scenario as written.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evac_run(scenario: *const EvacScenario, seed: u64, out: *mut *mut EvacRunResult) -> EvacStatus {
    guard(|| {
        non_null!(scenario, out);
        store(out, run_evacuation(&(*scenario).0.scenario, None, seed).map(EvacRunResult))
    })
}

/// # Safety
/// `result` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn evac_run_result_free(result: *mut EvacRunResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn evac_run_result_len(result: *const EvacRunResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.len())
}

/// Mean evacuation time in seconds; NaN for null.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn evac_run_result_average_s(result: *const EvacRunResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.0.average_s)
}

/// Outcome of agent `index`: duration in ms, exit id and wait count. Any
/// of the output pointers may be null.
///
/// # Safety
/// `result` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn evac_run_result_agent(
    result: *const EvacRunResult,
    index: usize,
    duration_ms: *mut u64,
    exit_id: *mut u32,
    waits: *mut u32,
) -> EvacStatus {
    guard(|| {
        non_null!(result);
        let r = &(*result).0;
        if index >= r.len() {
            return fail(EvacStatus::OutOfRange, format!("agent index {index} >= {}", r.len()));
        }
        if !duration_ms.is_null() {
            *duration_ms = r.durations_ms[index];
        }
        if !exit_id.is_null() {
            *exit_id = r.exit_ids[index];
        }
        if !waits.is_null() {
            *waits = r.wait_events[index];
        }
        EvacStatus::Ok
    })
}

/// Runs the scenario's `[optimizer]` section. `repeats` and `parallel` of 0
/// mean 1.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evac_optimize(
    scenario: *const EvacScenario,
    seed: u64,
    repeats: u32,
    parallel: u32,
    out: *mut *mut EvacReport,
) -> EvacStatus {
    guard(|| {
        non_null!(scenario, out);
        let file = &(*scenario).0;
        let Some(spec) = file.optimizer.as_ref() else {
            return fail(EvacStatus::Validation, "scenario has no [optimizer] section");
        };
        let options = OptimizeOptions {
            repeats: repeats.max(1),
            parallel: parallel.max(1) as usize,
        };
        store(out, optimize(&file.scenario, spec, seed, &options).map(EvacReport))
    })
}

/// # Safety
/// `report` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn evac_report_free(report: *mut EvacReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn evac_report_candidate_count(report: *const EvacReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.candidates.len())
}

/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn evac_report_best_index(report: *const EvacReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.best_index)
}

/// Location and average of candidate `index`. Any output may be null.
///
/// # Safety
/// `report` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn evac_report_candidate(
    report: *const EvacReport,
    index: usize,
    x: *mut i32,
    y: *mut i32,
    average_s: *mut f64,
) -> EvacStatus {
    guard(|| {
        non_null!(report);
        let r = &(*report).0;
        let Some(c) = r.candidates.get(index) else {
            return fail(EvacStatus::OutOfRange, format!("candidate index {index} >= {}", r.candidates.len()));
        };
        if !x.is_null() {
            *x = c.location.x;
        }
        if !y.is_null() {
            *y = c.location.y;
        }
        if !average_s.is_null() {
            *average_s = c.result.average_s;
        }
        EvacStatus::Ok
    })
}

/// Parses `M:S:MS` text into milliseconds.
///
/// # Safety
/// `source` must be a NUL-terminated string; `out_ms` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evac_parse_duration(source: *const c_char, out_ms: *mut u64) -> EvacStatus {
    guard(|| {
        non_null!(out_ms);
        let source = match text(source, "source") {
            Ok(s) => s,
            Err(s) => return s,
        };
        match parse_duration(source) {
            Ok(d) => {
                *out_ms = d.0;
                EvacStatus::Ok
            }
            Err(e) => fail(EvacStatus::Parse, e.to_string()),
        }
    })
}

/// Writes `M:S:MS` text for `ms` into `buf` (NUL-terminated). `needed`,
/// when non-null, receives the buffer size required including the NUL.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn evac_format_duration(ms: u64, buf: *mut c_char, len: usize, needed: *mut usize) -> EvacStatus {
    guard(|| {
        let text = DurationMs(ms).to_string();
        let size = text.len() + 1;
        if !needed.is_null() {
            *needed = size;
        }
        if buf.is_null() || len < size {
            return fail(EvacStatus::BufferTooSmall, format!("need {size} bytes, got {len}"));
        }
        ptr::copy_nonoverlapping(text.as_ptr(), buf.cast::<u8>(), text.len());
        *buf.add(text.len()) = 0;
        EvacStatus::Ok
    })
}
