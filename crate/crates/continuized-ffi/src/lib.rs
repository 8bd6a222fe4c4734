//! C ABI over the continuized acceleration library.
//!
//! Objectives and run traces live behind opaque handles created and released
//! by `cnz_*` calls. Every fallible call returns a [`CnzStatus`]; on any
//! status other than `CNZ_STATUS_OK` the output parameters are left
//! untouched and a human-readable explanation becomes readable through
//! [`cnz_last_error_message`]. The generated header is written to
//! `include/continuized_ffi.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::path::Path;

use continuized::methods::{run, Method, MethodConfig, RunRecord};
use continuized::oracle::{NoiseModel, Objective};
use continuized::schedules::Regime;
use continuized::Error;

/// Outcome of a fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnzStatus {
    /// The call succeeded and every output parameter is filled in.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// An argument was rejected; the message names it.
    InvalidArgument = 2,
    /// An input or computed quantity was NaN or infinite.
    NonFinite = 3,
    /// An iteration diverged; the message reports the failing step.
    StepFailed = 4,
    /// A file could not be read.
    IoFailed = 5,
    /// A file was read but could not be understood.
    ParseFailed = 6,
}

/// Iteration engine selector for [`cnz_run`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnzMethod {
    Gd = 0,
    Nesterov = 1,
    Continuized = 2,
}

/// Curvature regime selector for [`cnz_run`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnzRegime {
    Convex = 0,
    StronglyConvex = 1,
}

/// One recorded step of a run.
///
/// `lyap` carries the tracked potential for the momentum methods and is NaN
/// with `has_lyap` false for plain gradient descent.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CnzRecord {
    /// Gradient-step counter, starting at 0 for the initial point.
    pub k: u64,
    /// Continuous time of the step (equals `k` for deterministic methods).
    pub t: f64,
    /// Objective gap f(x_k) - f(x_*).
    pub f_gap: f64,
    /// Potential value, NaN when `has_lyap` is false.
    pub lyap: f64,
    pub has_lyap: bool,
}

/// Opaque handle to an objective function. Create with one of the
/// `cnz_objective_*` constructors, release with [`cnz_objective_free`].
pub struct CnzObjective {
    inner: Objective,
}

/// Opaque handle to a completed run. Create with [`cnz_run`], release with
/// [`cnz_trace_free`].
pub struct CnzTrace {
    records: Vec<RunRecord>,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_last_error(message: String) {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message);
}

fn fail(err: Error) -> CnzStatus {
    let status = match &err {
        Error::InvalidArgument { .. } => CnzStatus::InvalidArgument,
        Error::NonFinite { .. } => CnzStatus::NonFinite,
        Error::Step { .. } => CnzStatus::StepFailed,
        Error::Io { .. } => CnzStatus::IoFailed,
        Error::Parse { .. } | Error::Schema { .. } => CnzStatus::ParseFailed,
    };
    set_last_error(err.to_string());
    status
}

fn null_argument(name: &str) -> CnzStatus {
    set_last_error(format!("{name} must not be null"));
    CnzStatus::NullArgument
}

fn emit_objective(result: continuized::Result<Objective>, out: *mut *mut CnzObjective) -> CnzStatus {
    if out.is_null() {
        return null_argument("out");
    }
    match result {
        Ok(inner) => {
            let handle = Box::into_raw(Box::new(CnzObjective { inner }));
            unsafe { out.write(handle) };
            CnzStatus::Ok
        }
        Err(err) => fail(err),
    }
}

/// Copies the explanation of the most recent failure on this thread into
/// `buf` as a NUL-terminated string, truncating if `cap` is too small.
/// Returns the full message length in bytes (excluding the NUL); call with a
/// null `buf` or zero `cap` to size a buffer. The message is meaningful only
/// after a call returned a non-`CNZ_STATUS_OK` status.
///
/// # Safety
/// `buf` must either be null or point to at least `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn cnz_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes();
        if !buf.is_null() && cap > 0 {
            let copy = bytes.len().min(cap - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), copy);
                buf.add(copy).write(0);
            }
        }
        bytes.len()
    })
}

/// Creates the 3-dimensional test objective with curvatures `mu`, `3 mu`,
/// and `L`. On success writes a handle to `out`.
///
/// # Safety
/// `out` must be null or point to a writable `CnzObjective*` slot.
#[no_mangle]
pub unsafe extern "C" fn cnz_objective_quad3(
    mu: f64,
    l: f64,
    out: *mut *mut CnzObjective,
) -> CnzStatus {
    emit_objective(Objective::quad3(mu, l), out)
}

/// Creates the 100-dimensional ill-conditioned test objective.
///
/// # Safety
/// `out` must be null or point to a writable `CnzObjective*` slot.
#[no_mangle]
pub unsafe extern "C" fn cnz_objective_quad100(out: *mut *mut CnzObjective) -> CnzStatus {
    emit_objective(Ok(Objective::quad100()), out)
}

/// Loads a diagonal quadratic from a JSON file of the form
/// `{"coeffs": [...], "center": [...]}`.
///
/// # Safety
/// `path` must be null or a NUL-terminated string; `out` must be null or
/// point to a writable `CnzObjective*` slot.
#[no_mangle]
pub unsafe extern "C" fn cnz_objective_from_json_file(
    path: *const c_char,
    out: *mut *mut CnzObjective,
) -> CnzStatus {
    if path.is_null() {
        return null_argument("path");
    }
    let path = match unsafe { CStr::from_ptr(path) }.to_str() {
        Ok(s) => Path::new(s),
        Err(_) => {
            set_last_error("path is not valid UTF-8".to_string());
            return CnzStatus::InvalidArgument;
        }
    };
    emit_objective(Objective::from_json_file(path), out)
}

/// Releases an objective handle. Null is ignored.
///
/// # Safety
/// `obj` must be null or a handle from a `cnz_objective_*` constructor that
/// has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn cnz_objective_free(obj: *mut CnzObjective) {
    if !obj.is_null() {
        drop(unsafe { Box::from_raw(obj) });
    }
}

/// Dimension of the objective; 0 when `obj` is null.
///
/// # Safety
/// `obj` must be null or a live objective handle.
#[no_mangle]
pub unsafe extern "C" fn cnz_objective_dim(obj: *const CnzObjective) -> usize {
    unsafe { obj.as_ref() }.map_or(0, |o| o.inner.dim)
}

/// Smoothness constant L; NaN when `obj` is null.
///
/// # Safety
/// `obj` must be null or a live objective handle.
#[no_mangle]
pub unsafe extern "C" fn cnz_objective_smoothness(obj: *const CnzObjective) -> f64 {
    unsafe { obj.as_ref() }.map_or(f64::NAN, |o| o.inner.l)
}

/// Strong-convexity constant mu; NaN when `obj` is null.
///
/// # Safety
/// `obj` must be null or a live objective handle.
#[no_mangle]
pub unsafe extern "C" fn cnz_objective_strong_convexity(obj: *const CnzObjective) -> f64 {
    unsafe { obj.as_ref() }.map_or(f64::NAN, |o| o.inner.mu)
}

unsafe fn point_arg<'a>(obj: &Objective, x: *const f64, len: usize) -> Result<&'a [f64], CnzStatus> {
    if x.is_null() {
        return Err(null_argument("x"));
    }
    if len != obj.dim {
        set_last_error(format!("x has length {len}, objective has dimension {}", obj.dim));
        return Err(CnzStatus::InvalidArgument);
    }
    Ok(unsafe { std::slice::from_raw_parts(x, len) })
}

/// Writes the minimizer into `out`, which must hold `cnz_objective_dim`
/// elements.
///
/// # Safety
/// `obj` must be null or a live objective handle; `out` must be null or
/// point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn cnz_objective_minimizer(
    obj: *const CnzObjective,
    out: *mut f64,
    len: usize,
) -> CnzStatus {
    let Some(handle) = (unsafe { obj.as_ref() }) else {
        return null_argument("obj");
    };
    if out.is_null() {
        return null_argument("out");
    }
    if len != handle.inner.dim {
        set_last_error(format!(
            "out has length {len}, objective has dimension {}",
            handle.inner.dim
        ));
        return CnzStatus::InvalidArgument;
    }
    unsafe { std::ptr::copy_nonoverlapping(handle.inner.x_star.as_ptr(), out, len) };
    CnzStatus::Ok
}

/// Evaluates the objective at `x` (length `len`) and writes f(x) to `out`.
///
/// # Safety
/// `obj` must be null or a live objective handle; `x` must be null or point
/// to `len` readable doubles; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn cnz_objective_value(
    obj: *const CnzObjective,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> CnzStatus {
    let Some(handle) = (unsafe { obj.as_ref() }) else {
        return null_argument("obj");
    };
    if out.is_null() {
        return null_argument("out");
    }
    match unsafe { point_arg(&handle.inner, x, len) } {
        Ok(point) => {
            unsafe { out.write(handle.inner.value(point)) };
            CnzStatus::Ok
        }
        Err(status) => status,
    }
}

/// Evaluates the objective gap f(x) - f(x_*) and writes it to `out`.
///
/// # Safety
/// Same contract as [`cnz_objective_value`].
#[no_mangle]
pub unsafe extern "C" fn cnz_objective_gap(
    obj: *const CnzObjective,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> CnzStatus {
    let Some(handle) = (unsafe { obj.as_ref() }) else {
        return null_argument("obj");
    };
    if out.is_null() {
        return null_argument("out");
    }
    match unsafe { point_arg(&handle.inner, x, len) } {
        Ok(point) => {
            unsafe { out.write(handle.inner.f_gap(point)) };
            CnzStatus::Ok
        }
        Err(status) => status,
    }
}

/// Writes the gradient at `x` into `out`; both buffers hold `len` doubles.
///
/// # Safety
/// `obj` must be null or a live objective handle; `x` must be null or point
/// to `len` readable doubles; `out` must be null or point to `len` writable
/// doubles not overlapping `x`.
#[no_mangle]
pub unsafe extern "C" fn cnz_objective_grad(
    obj: *const CnzObjective,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> CnzStatus {
    let Some(handle) = (unsafe { obj.as_ref() }) else {
        return null_argument("obj");
    };
    if out.is_null() {
        return null_argument("out");
    }
    let point = match unsafe { point_arg(&handle.inner, x, len) } {
        Ok(point) => point,
        Err(status) => return status,
    };
    match handle.inner.grad(point) {
        Ok(gradient) => {
            unsafe { std::ptr::copy_nonoverlapping(gradient.as_ptr(), out, len) };
            CnzStatus::Ok
        }
        Err(err) => fail(err),
    }
}

/// Runs a method for `steps` gradient steps and hands back a trace handle.
///
/// `sigma_g2` is the per-coordinate variance of additive gradient noise;
/// pass 0 for a noiseless run. `start` may be null, in which case noiseless
/// runs start at the origin and noisy runs at the minimizer; otherwise it
/// must point to `cnz_objective_dim` doubles used as the common initial
/// point. The strongly convex regime requires `mu > 0`.
///
/// # Safety
/// `obj` must be null or a live objective handle; `start` must be null or
/// point to `cnz_objective_dim(obj)` readable doubles; `out` must be null or
/// point to a writable `CnzTrace*` slot. `method` and `regime` must be
/// values of their enums.
#[no_mangle]
pub unsafe extern "C" fn cnz_run(
    obj: *const CnzObjective,
    method: CnzMethod,
    regime: CnzRegime,
    mu: f64,
    l: f64,
    sigma_g2: f64,
    seed: u64,
    steps: usize,
    start: *const f64,
    out: *mut *mut CnzTrace,
) -> CnzStatus {
    let Some(handle) = (unsafe { obj.as_ref() }) else {
        return null_argument("obj");
    };
    if out.is_null() {
        return null_argument("out");
    }
    let noise = if sigma_g2 == 0.0 {
        None
    } else {
        match NoiseModel::isotropic(sigma_g2, handle.inner.dim) {
            Ok(model) => Some(model),
            Err(err) => return fail(err),
        }
    };
    let start = if start.is_null() {
        None
    } else {
        Some(unsafe { std::slice::from_raw_parts(start, handle.inner.dim) }.to_vec())
    };
    let config = MethodConfig {
        method: match method {
            CnzMethod::Gd => Method::Gd,
            CnzMethod::Nesterov => Method::Nesterov,
            CnzMethod::Continuized => Method::Continuized,
        },
        regime: match regime {
            CnzRegime::Convex => Regime::Convex,
            CnzRegime::StronglyConvex => Regime::StronglyConvex,
        },
        mu,
        l,
        noise,
        seed,
        steps,
        start,
    };
    match run(&config, &handle.inner) {
        Ok(records) => {
            let trace = Box::into_raw(Box::new(CnzTrace { records }));
            unsafe { out.write(trace) };
            CnzStatus::Ok
        }
        Err(err) => fail(err),
    }
}

/// Number of records in the trace (steps + 1); 0 when `trace` is null.
///
/// # Safety
/// `trace` must be null or a live trace handle.
#[no_mangle]
pub unsafe extern "C" fn cnz_trace_len(trace: *const CnzTrace) -> usize {
    unsafe { trace.as_ref() }.map_or(0, |t| t.records.len())
}

/// Copies record `index` of the trace into `out`.
///
/// # Safety
/// `trace` must be null or a live trace handle; `out` must be null or point
/// to a writable `CnzRecord`.
#[no_mangle]
pub unsafe extern "C" fn cnz_trace_record(
    trace: *const CnzTrace,
    index: usize,
    out: *mut CnzRecord,
) -> CnzStatus {
    let Some(handle) = (unsafe { trace.as_ref() }) else {
        return null_argument("trace");
    };
    if out.is_null() {
        return null_argument("out");
    }
    let Some(record) = handle.records.get(index) else {
        set_last_error(format!(
            "index {index} out of range for a trace of {} records",
            handle.records.len()
        ));
        return CnzStatus::InvalidArgument;
    };
    unsafe {
        out.write(CnzRecord {
            k: record.k as u64,
            t: record.t,
            f_gap: record.f_gap,
            lyap: record.lyap.unwrap_or(f64::NAN),
            has_lyap: record.lyap.is_some(),
        });
    }
    CnzStatus::Ok
}

/// Objective gap of the last record; NaN when `trace` is null or empty.
///
/// # Safety
/// `trace` must be null or a live trace handle.
#[no_mangle]
pub unsafe extern "C" fn cnz_trace_final_gap(trace: *const CnzTrace) -> f64 {
    unsafe { trace.as_ref() }
        .and_then(|t| t.records.last())
        .map_or(f64::NAN, |record| record.f_gap)
}

/// Releases a trace handle. Null is ignored.
///
/// # Safety
/// `trace` must be null or a handle from [`cnz_run`] that has not been
/// freed yet.
#[no_mangle]
pub unsafe extern "C" fn cnz_trace_free(trace: *mut CnzTrace) {
    if !trace.is_null() {
        drop(unsafe { Box::from_raw(trace) });
    }
}
