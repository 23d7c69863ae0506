//! C ABI over the covctl engine.
//!
//! Environments and runs are opaque heap handles owned by the caller and
//! released with `cov_env_free` / `cov_run_free`. Every fallible call returns
//! a [`CovStatus`]; on failure the message is available from
//! `cov_last_error` on the same thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use covctl::coverage::Instance;
use covctl::env_graph::orlib::{load_orlib, OrlibOptions};
use covctl::env_graph::EnvGraph;
use covctl::harness::{AlgId, AlgRecord, ShapeSpec, TrialConfig};
use covctl::{Error, NodeId};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Parse = 4,
    Io = 5,
    Graph = 6,
    Algorithm = 7,
    IterationCap = 8,
    InvariantBreach = 9,
    Panic = 10,
}

/// Environment graph with its distance oracle.
pub struct CovEnv {
    inst: Instance,
}

/// Result of one algorithm run.
pub struct CovRun {
    record: AlgRecord,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> CovStatus {
    match e {
        Error::DisconnectedGraph { .. } | Error::InvalidEdge(..) | Error::NegativeWeight { .. } => {
            CovStatus::Graph
        }
        Error::Parse { .. } | Error::Json(_) | Error::Config(_) => CovStatus::Parse,
        Error::Io { .. } => CovStatus::Io,
        Error::IterationCapExceeded { .. } => CovStatus::IterationCap,
        Error::InvariantBreach { .. } => CovStatus::InvariantBreach,
        Error::InvalidParams(_)
        | Error::EmptyAllocation
        | Error::NonExclusive(_)
        | Error::TooManyAgents { .. }
        | Error::EmptyInput => CovStatus::InvalidArgument,
        _ => CovStatus::Algorithm,
    }
}

struct Fail(CovStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CovStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CovStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            CovStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(CovStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(CovStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

fn null(name: &str) -> Fail {
    Fail(CovStatus::NullPointer, format!("{name} is null"))
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Parses a graph document (`weights`, `edges`, optional `coords`).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cov_env_from_json(
    json: *const c_char,
    out: *mut *mut CovEnv,
) -> CovStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let env = EnvGraph::from_json(str_arg(json, "json")?)?;
        put(
            out,
            CovEnv {
                inst: Instance::with_defaults(env),
            },
        );
        Ok(())
    })
}

/// Builds a generated shape from a JSON shape spec such as
/// `{"kind":"chain","m":20,"valued":10}`. `epsilon` is the weight of
/// unvalued nodes.
///
/// # Safety
/// `shape_json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cov_env_generate(
    shape_json: *const c_char,
    seed: u64,
    epsilon: f64,
    out: *mut *mut CovEnv,
) -> CovStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spec: ShapeSpec =
            serde_json::from_str(str_arg(shape_json, "shape_json")?).map_err(Error::from)?;
        let env = spec.build(seed, epsilon, None)?;
        put(
            out,
            CovEnv {
                inst: Instance::with_defaults(env),
            },
        );
        Ok(())
    })
}

/// Loads an OR-library p-median file. Edge costs become hop counts
/// `max(1, round(cost / cost_scale))`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cov_env_load_orlib(
    path: *const c_char,
    cost_scale: f64,
    epsilon: f64,
    out: *mut *mut CovEnv,
) -> CovStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let opts = OrlibOptions {
            cost_scale,
            epsilon,
            ..OrlibOptions::default()
        };
        let (_, env) = load_orlib(str_arg(path, "path")?, opts)?;
        put(
            out,
            CovEnv {
                inst: Instance::with_defaults(env),
            },
        );
        Ok(())
    })
}

/// Number of nodes, or 0 for a null handle.
///
/// # Safety
/// `env` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cov_env_node_count(env: *const CovEnv) -> usize {
    env.as_ref().map_or(0, |e| e.inst.node_count())
}

/// Serializes the graph; release the string with `cov_string_free`.
///
/// # Safety
/// `env` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cov_env_to_json(env: *const CovEnv, out: *mut *mut c_char) -> CovStatus {
    guard(|| {
        let env = env.as_ref().ok_or_else(|| null("env"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = CString::new(env.inst.env().to_json())
            .map_err(|e| Fail(CovStatus::Parse, e.to_string()))?;
        *out = s.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn cov_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `env` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn cov_env_free(env: *mut CovEnv) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

/// Objective `G` of the allocation `positions[0..n]`.
///
/// # Safety
/// `env` must be a live handle, `positions` must point to `n` node ids and
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cov_objective(
    env: *const CovEnv,
    positions: *const usize,
    n: usize,
    out: *mut f64,
) -> CovStatus {
    guard(|| {
        let env = env.as_ref().ok_or_else(|| null("env"))?;
        if positions.is_null() || out.is_null() {
            return Err(null("positions or out"));
        }
        let pos: &[NodeId] = std::slice::from_raw_parts(positions, n);
        covctl::coverage::Allocation::new(pos.to_vec(), env.inst.node_count())?;
        *out = env.inst.objective(pos)?;
        Ok(())
    })
}

/// Runs `alg` (`nbo`, `vvp`, `sota`, `cgr` or `opt`) with `n_agents` agents.
/// The initial allocation is drawn uniformly from `seed`, as in a trial.
///
/// # Safety
/// `env` must be a live handle, `alg` a NUL-terminated string and `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cov_run(
    env: *const CovEnv,
    alg: *const c_char,
    n_agents: usize,
    seed: u64,
    out: *mut *mut CovRun,
) -> CovStatus {
    guard(|| {
        let env = env.as_ref().ok_or_else(|| null("env"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let alg: AlgId = str_arg(alg, "alg")?
            .parse()
            .map_err(|e: Error| Fail(CovStatus::InvalidArgument, e.to_string()))?;
        let cfg = TrialConfig {
            agents: n_agents,
            seed,
            ..TrialConfig::default()
        };
        let initial = cfg.initial(env.inst.node_count())?;
        let record = covctl::harness::run_algorithm(&env.inst, &cfg, alg, &initial)?;
        put(out, CovRun { record });
        Ok(())
    })
}

/// Objective of the final allocation, or NaN for a null handle.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cov_run_objective(run: *const CovRun) -> f64 {
    run.as_ref().and_then(|r| r.record.g).unwrap_or(f64::NAN)
}

/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cov_run_iterations(run: *const CovRun) -> u64 {
    run.as_ref().map_or(0, |r| r.record.iterations)
}

/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cov_run_converged(run: *const CovRun) -> bool {
    run.as_ref().is_some_and(|r| r.record.converged)
}

/// Copies up to `cap` agent positions into `buf` and returns the agent
/// count. Pass `buf = NULL` to query the count.
///
/// # Safety
/// `run` must be null or a live handle; `buf` must be null or hold `cap`
/// elements.
#[no_mangle]
pub unsafe extern "C" fn cov_run_positions(
    run: *const CovRun,
    buf: *mut usize,
    cap: usize,
) -> usize {
    let Some(run) = run.as_ref() else { return 0 };
    let pos = &run.record.positions;
    if !buf.is_null() {
        let k = pos.len().min(cap);
        ptr::copy_nonoverlapping(pos.as_ptr(), buf, k);
    }
    pos.len()
}

/// # Safety
/// `run` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn cov_run_free(run: *mut CovRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn cov_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}
