//! C ABI over `spikeloc`.
//!
//! Objects are opaque heap handles released with the matching `_free`
//! function. Every fallible call returns a [`SpikelocStatus`]; the message of
//! the most recent failure on the calling thread is available through
//! [`spikeloc_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use spikeloc::error::{Error, EXIT_DIVERGENCE, EXIT_IO, EXIT_VALIDATION};
use spikeloc::groundstate::{self, GroundStateRecord, SolveOptions};
use spikeloc::landscape::{self, CandidateOptions, CriticalKind, SpikeCandidate};
use spikeloc::model::{self, PotentialTriple, ProblemParams, SearchBox};
use spikeloc::radial::RadialGrid;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpikelocStatus {
    Ok = 0,
    Io = 1,
    Validation = 2,
    Divergence = 3,
    NullPointer = 10,
    InvalidUtf8 = 11,
    DimensionMismatch = 12,
    OutOfRange = 13,
    Panic = 14,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpikelocKind {
    MinimumOfSigma = 0,
    MaximumOfSigma = 1,
    Saddle = 2,
    Degenerate = 3,
}

/// Dimension, exponents and the three potentials.
pub struct SpikelocProblem {
    params: ProblemParams,
    potentials: PotentialTriple,
}

/// Canonical ground state on a radial grid.
pub struct SpikelocGroundState {
    record: GroundStateRecord,
}

/// Critical points of the energy landscape.
pub struct SpikelocCandidates {
    items: Vec<SpikeCandidate>,
    degenerate: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: SpikelocStatus, msg: impl Into<String>) -> SpikelocStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> SpikelocStatus {
    let status = match e.exit_code() {
        EXIT_IO => SpikelocStatus::Io,
        EXIT_DIVERGENCE => SpikelocStatus::Divergence,
        EXIT_VALIDATION => SpikelocStatus::Validation,
        _ => SpikelocStatus::Validation,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> SpikelocStatus) -> SpikelocStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(SpikelocStatus::Panic, msg)
        }
    }
}

unsafe fn str_arg<'a>(ptr: *const c_char, name: &str) -> Result<Option<&'a str>, SpikelocStatus> {
    if ptr.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map(Some)
        .map_err(|_| fail(SpikelocStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(SpikelocStatus::NullPointer, concat!(stringify!($p), " is null"));
        })+
    };
}

/// Toolkit version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn spikeloc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message into `buf` (truncated, always
/// NUL-terminated when `cap > 0`) and returns the full message length.
///
/// # Safety
/// `buf` must point to `cap` writable bytes or be null.
#[no_mangle]
pub unsafe extern "C" fn spikeloc_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Validates a problem. Null potential strings default to `"1"`.
///
/// # Safety
/// String arguments must be null or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spikeloc_problem_new(
    n: usize,
    p: f64,
    q: f64,
    k_expr: *const c_char,
    q_expr: *const c_char,
    v_expr: *const c_char,
    out: *mut *mut SpikelocProblem,
) -> SpikelocStatus {
    non_null!(out);
    guard(|| {
        let k = match str_arg(k_expr, "k_expr") {
            Ok(s) => s.unwrap_or("1"),
            Err(s) => return s,
        };
        let qq = match str_arg(q_expr, "q_expr") {
            Ok(s) => s.unwrap_or("1"),
            Err(s) => return s,
        };
        let v = match str_arg(v_expr, "v_expr") {
            Ok(s) => s,
            Err(s) => return s,
        };
        let params = match model::validate_params(n, p, q) {
            Ok(x) => x,
            Err(e) => return from_error(e.into()),
        };
        let potentials = match PotentialTriple::parse(k, qq, v, n) {
            Ok(x) => x,
            Err(e) => return from_error(e.into()),
        };
        *out = Box::into_raw(Box::new(SpikelocProblem { params, potentials }));
        SpikelocStatus::Ok
    })
}

/// # Safety
/// `problem` must come from [`spikeloc_problem_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn spikeloc_problem_free(problem: *mut SpikelocProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Solves the canonical ground state. `radius <= 0` or `nodes == 0` selects
/// the dimension default grid.
///
/// # Safety
/// `problem` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn spikeloc_ground_state_solve(
    problem: *const SpikelocProblem,
    radius: f64,
    nodes: usize,
    out: *mut *mut SpikelocGroundState,
) -> SpikelocStatus {
    non_null!(problem, out);
    guard(|| {
        let pr = &*problem;
        let n = pr.params.n();
        let grid = if radius > 0.0 && nodes > 0 {
            match RadialGrid::new(n, radius, nodes) {
                Ok(g) => g,
                Err(e) => return from_error(e.into()),
            }
        } else {
            RadialGrid::default_for(n)
        };
        match groundstate::solve_canonical(&pr.params, &grid, &SolveOptions::default()) {
            Ok(record) => {
                *out = Box::into_raw(Box::new(SpikelocGroundState { record }));
                SpikelocStatus::Ok
            }
            Err(e) => from_error(e.into()),
        }
    })
}

/// # Safety
/// `gs` must come from [`spikeloc_ground_state_solve`] or be null.
#[no_mangle]
pub unsafe extern "C" fn spikeloc_ground_state_free(gs: *mut SpikelocGroundState) {
    if !gs.is_null() {
        drop(Box::from_raw(gs));
    }
}

/// Energy level, peaks and decay rate. Any output pointer may be null.
///
/// # Safety
/// `gs` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn spikeloc_ground_state_summary(
    gs: *const SpikelocGroundState,
    gamma: *mut f64,
    peak_u: *mut f64,
    peak_v: *mut f64,
    theta: *mut f64,
) -> SpikelocStatus {
    non_null!(gs);
    let r = &(*gs).record;
    for (ptr, value) in [(gamma, r.gamma), (peak_u, r.peak_u), (peak_v, r.peak_v), (theta, r.theta)] {
        if !ptr.is_null() {
            *ptr = value;
        }
    }
    SpikelocStatus::Ok
}

/// Number of radial nodes.
///
/// # Safety
/// `gs` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn spikeloc_ground_state_len(gs: *const SpikelocGroundState) -> usize {
    if gs.is_null() {
        0
    } else {
        (*gs).record.profile.grid.len()
    }
}

/// Copies nodes and profiles into arrays of length `len`, which must equal
/// [`spikeloc_ground_state_len`]. Null arrays are skipped.
///
/// # Safety
/// Non-null arrays must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn spikeloc_ground_state_profile(
    gs: *const SpikelocGroundState,
    r: *mut f64,
    u: *mut f64,
    v: *mut f64,
    len: usize,
) -> SpikelocStatus {
    non_null!(gs);
    let rec = &(*gs).record;
    let m = rec.profile.grid.len();
    if len != m {
        return fail(SpikelocStatus::DimensionMismatch, format!("profile has {m} nodes, buffer {len}"));
    }
    if !r.is_null() {
        for (i, x) in rec.profile.grid.nodes().enumerate() {
            *r.add(i) = x;
        }
    }
    if !u.is_null() {
        std::ptr::copy_nonoverlapping(rec.profile.u.0.as_ptr(), u, m);
    }
    if !v.is_null() {
        std::ptr::copy_nonoverlapping(rec.profile.v.0.as_ptr(), v, m);
    }
    SpikelocStatus::Ok
}

/// Σ and its gradient at `z` (length `dim`). `grad` may be null.
///
/// # Safety
/// Handles must be live; `z` and non-null `grad` must hold `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn spikeloc_sigma_at(
    problem: *const SpikelocProblem,
    gs: *const SpikelocGroundState,
    z: *const f64,
    dim: usize,
    sigma: *mut f64,
    grad: *mut f64,
) -> SpikelocStatus {
    non_null!(problem, gs, z, sigma);
    guard(|| {
        let pr = &*problem;
        let rec = &(*gs).record;
        if rec.params != pr.params {
            return fail(SpikelocStatus::Validation, "ground state was solved for a different problem");
        }
        if dim != pr.params.n() {
            return fail(
                SpikelocStatus::DimensionMismatch,
                format!("z has {dim} components, problem dimension is {}", pr.params.n()),
            );
        }
        let z = std::slice::from_raw_parts(z, dim);
        match landscape::sigma_at(z, &pr.potentials, rec) {
            Ok(s) => {
                *sigma = s.sigma;
                if !grad.is_null() {
                    std::ptr::copy_nonoverlapping(s.grad_sigma.as_ptr(), grad, dim);
                }
                SpikelocStatus::Ok
            }
            Err(e) => from_error(e.into()),
        }
    })
}

/// Multistart search for critical points of Σ inside `[lo, hi]`.
///
/// # Safety
/// `problem` must be live; `lo`, `hi` must hold `dim` doubles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spikeloc_locate(
    problem: *const SpikelocProblem,
    lo: *const f64,
    hi: *const f64,
    dim: usize,
    seed: u64,
    out: *mut *mut SpikelocCandidates,
) -> SpikelocStatus {
    non_null!(problem, lo, hi, out);
    guard(|| {
        let pr = &*problem;
        if dim != pr.params.n() {
            return fail(
                SpikelocStatus::DimensionMismatch,
                format!("box has {dim} components, problem dimension is {}", pr.params.n()),
            );
        }
        let region = SearchBox::new(
            std::slice::from_raw_parts(lo, dim).to_vec(),
            std::slice::from_raw_parts(hi, dim).to_vec(),
        );
        let opts = CandidateOptions {
            seed,
            ..CandidateOptions::default()
        };
        match landscape::find_spike_candidates(&pr.potentials, &region, &pr.params, &opts) {
            Ok(report) => {
                *out = Box::into_raw(Box::new(SpikelocCandidates {
                    items: report.candidates,
                    degenerate: report.degenerate,
                }));
                SpikelocStatus::Ok
            }
            Err(e) => from_error(e.into()),
        }
    })
}

/// # Safety
/// `c` must come from [`spikeloc_locate`] or be null.
#[no_mangle]
pub unsafe extern "C" fn spikeloc_candidates_free(c: *mut SpikelocCandidates) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// # Safety
/// `c` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn spikeloc_candidates_len(c: *const SpikelocCandidates) -> usize {
    if c.is_null() {
        0
    } else {
        (*c).items.len()
    }
}

/// True when Σ is constant over the box and every point is critical.
///
/// # Safety
/// `c` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn spikeloc_candidates_degenerate(c: *const SpikelocCandidates) -> bool {
    !c.is_null() && (*c).degenerate
}

/// Location (into `z`, length `dim`), classification and locator value of
/// candidate `index`. `kind` and `g_value` may be null.
///
/// # Safety
/// `c` must be live; `z` must hold `dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn spikeloc_candidates_get(
    c: *const SpikelocCandidates,
    index: usize,
    z: *mut f64,
    dim: usize,
    kind: *mut SpikelocKind,
    g_value: *mut f64,
) -> SpikelocStatus {
    non_null!(c, z);
    let items = &(*c).items;
    let Some(item) = items.get(index) else {
        return fail(SpikelocStatus::OutOfRange, format!("candidate {index} of {}", items.len()));
    };
    if dim != item.z.len() {
        return fail(
            SpikelocStatus::DimensionMismatch,
            format!("buffer has {dim} components, candidate has {}", item.z.len()),
        );
    }
    std::ptr::copy_nonoverlapping(item.z.as_ptr(), z, dim);
    if !kind.is_null() {
        *kind = match item.kind {
            CriticalKind::MinimumOfSigma => SpikelocKind::MinimumOfSigma,
            CriticalKind::MaximumOfSigma => SpikelocKind::MaximumOfSigma,
            CriticalKind::Saddle => SpikelocKind::Saddle,
            CriticalKind::Degenerate => SpikelocKind::Degenerate,
        };
    }
    if !g_value.is_null() {
        *g_value = item.g_value;
    }
    SpikelocStatus::Ok
}
