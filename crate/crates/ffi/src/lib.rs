//! C ABI over the slog-energy solvers.
//!
//! Spaces and solver results are opaque handles created and destroyed here;
//! every fallible call returns a [`SlogStatus`] and leaves a human-readable
//! message retrievable with [`slog_last_error`] on the calling thread.
//! Callers own whatever a `slog_*_new`/solve call hands back and must release
//! it with the matching `slog_*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;

use slog_energy::{
    best_packing, energy, kernel_eval, minimize_energy, Configuration, Error, KernelParams,
    MetricKind, SolveOptions, Space,
};

/// Outcome of an FFI call. Values other than `Ok` leave a detail message
/// readable via `slog_last_error` on the same thread.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlogStatus {
    Ok = 0,
    /// An input left the numeric domain a function is defined on.
    Domain = 1,
    /// A space could not be constructed or fails its metric axioms.
    InvalidSpace = 2,
    /// A configuration violates its space or point-count requirements.
    InvalidConfiguration = 3,
    /// An argument (options, exponents, sizes) fails validation.
    InvalidArgument = 4,
    /// Exhaustive enumeration would exceed the configured budget.
    BudgetExceeded = 5,
    /// The solver could not produce any usable iterate.
    SolverFailure = 6,
    /// No known optimality criterion applies to the requested parameters.
    HypothesisNotCovered = 7,
    /// A text input failed to parse.
    Parse = 8,
    Io = 9,
    /// A required pointer argument was null.
    NullPointer = 10,
    /// A string argument was not valid UTF-8.
    Utf8 = 11,
    /// An internal invariant failed; the library state is still valid.
    Panic = 12,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> SlogStatus {
    match err {
        Error::Domain(_) => SlogStatus::Domain,
        Error::InvalidSpace(_) => SlogStatus::InvalidSpace,
        Error::InvalidConfiguration(_) | Error::SignatureMismatch { .. } => {
            SlogStatus::InvalidConfiguration
        }
        Error::InvalidArgument(_) => SlogStatus::InvalidArgument,
        Error::BudgetExceeded { .. } => SlogStatus::BudgetExceeded,
        Error::SolverFailure(_) => SlogStatus::SolverFailure,
        Error::HypothesisNotCovered(_) => SlogStatus::HypothesisNotCovered,
        Error::Parse(_) => SlogStatus::Parse,
        Error::Io(_) => SlogStatus::Io,
        Error::Json(_) => SlogStatus::Parse,
    }
}

fn fail(err: Error) -> SlogStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

/// Runs a body under panic isolation so no unwind crosses the ABI.
fn guard(body: impl FnOnce() -> SlogStatus) -> SlogStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic; see stderr for details");
            SlogStatus::Panic
        }
    }
}

macro_rules! require_nonnull {
    ($ptr:expr) => {
        if $ptr.is_null() {
            set_error(concat!(stringify!($ptr), " must not be null"));
            return SlogStatus::NullPointer;
        }
    };
}

/// Opaque handle to a metric space.
pub struct SlogSpace(Arc<Space>);

/// Opaque handle to a solve outcome: the point set plus its scores.
/// Packing results report the achieved separation in `separation` and carry
/// NaN energies, since no kernel is involved.
pub struct SlogResult {
    points: Vec<f64>,
    point_len: usize,
    n: usize,
    energy_linear: f64,
    energy_log: f64,
    separation: f64,
    converged: bool,
    starts_agreeing: usize,
}

/// Multi-start solver knobs; get defaults from `slog_solve_options_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SlogSolveOptions {
    /// Independent random restarts.
    pub starts: usize,
    /// Iteration cap per start.
    pub max_iters: usize,
    /// Convergence threshold on the projected gradient of the log-energy.
    pub grad_tol: f64,
    /// Seed from which every start's generator is derived.
    pub seed: u64,
    /// Nonzero adds a random-perturbation polish between descent passes.
    pub anneal: bool,
}

impl SlogSolveOptions {
    fn to_options(self) -> SolveOptions {
        SolveOptions {
            starts: self.starts,
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
            seed: self.seed,
            anneal: self.anneal,
        }
    }
}

#[no_mangle]
pub extern "C" fn slog_solve_options_default() -> SlogSolveOptions {
    let o = SolveOptions::default();
    SlogSolveOptions {
        starts: o.starts,
        max_iters: o.max_iters,
        grad_tol: o.grad_tol,
        seed: o.seed,
        anneal: o.anneal,
    }
}

/// Short static name for a status code; never null.
#[no_mangle]
pub extern "C" fn slog_status_name(status: SlogStatus) -> *const c_char {
    let name: &'static [u8] = match status {
        SlogStatus::Ok => b"ok\0",
        SlogStatus::Domain => b"domain error\0",
        SlogStatus::InvalidSpace => b"invalid space\0",
        SlogStatus::InvalidConfiguration => b"invalid configuration\0",
        SlogStatus::InvalidArgument => b"invalid argument\0",
        SlogStatus::BudgetExceeded => b"budget exceeded\0",
        SlogStatus::SolverFailure => b"solver failure\0",
        SlogStatus::HypothesisNotCovered => b"hypothesis not covered\0",
        SlogStatus::Parse => b"parse error\0",
        SlogStatus::Io => b"io error\0",
        SlogStatus::NullPointer => b"null pointer\0",
        SlogStatus::Utf8 => b"invalid utf-8\0",
        SlogStatus::Panic => b"internal panic\0",
    };
    name.as_ptr() as *const c_char
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncating to `cap` bytes) and returns the full message length in bytes,
/// excluding the NUL. `buf` may be null or `cap` zero to query the length.
///
/// # Safety
/// `buf`, when non-null, must point to at least `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn slog_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let copy = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, copy);
            *buf.add(copy) = 0;
        }
        bytes.len()
    })
}

fn box_space(space: Space, out: *mut *mut SlogSpace) -> SlogStatus {
    let handle = Box::new(SlogSpace(Arc::new(space)));
    // Safety contract of the callers: out is a valid, writable pointer.
    unsafe { *out = Box::into_raw(handle) };
    SlogStatus::Ok
}

/// Creates the segment [a, b]. Fails unless a < b and b - a stays below 1.
///
/// # Safety
/// `out` must be a valid pointer to a `SlogSpace*` slot.
#[no_mangle]
pub unsafe extern "C" fn slog_space_new_segment(
    a: f64,
    b: f64,
    out: *mut *mut SlogSpace,
) -> SlogStatus {
    guard(|| {
        require_nonnull!(out);
        match Space::segment(a, b) {
            Ok(space) => box_space(space, out),
            Err(e) => fail(e),
        }
    })
}

/// Creates a circle of radius `alpha`; `chord` nonzero selects the chord
/// metric, zero the geodesic one. The diameter must stay below 1.
///
/// # Safety
/// `out` must be a valid pointer to a `SlogSpace*` slot.
#[no_mangle]
pub unsafe extern "C" fn slog_space_new_circle(
    alpha: f64,
    chord: bool,
    out: *mut *mut SlogSpace,
) -> SlogStatus {
    guard(|| {
        require_nonnull!(out);
        let kind = if chord { MetricKind::Chord } else { MetricKind::Geodesic };
        match Space::circle(alpha, kind) {
            Ok(space) => box_space(space, out),
            Err(e) => fail(e),
        }
    })
}

/// Creates the origin-centered sphere of radius `alpha` (diameter below 1).
///
/// # Safety
/// `out` must be a valid pointer to a `SlogSpace*` slot.
#[no_mangle]
pub unsafe extern "C" fn slog_space_new_sphere(alpha: f64, out: *mut *mut SlogSpace) -> SlogStatus {
    guard(|| {
        require_nonnull!(out);
        match Space::sphere(alpha) {
            Ok(space) => box_space(space, out),
            Err(e) => fail(e),
        }
    })
}

/// Loads a finite metric space from a CSV distance matrix file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer to a
/// `SlogSpace*` slot.
#[no_mangle]
pub unsafe extern "C" fn slog_space_new_finite_csv(
    path: *const c_char,
    out: *mut *mut SlogSpace,
) -> SlogStatus {
    guard(|| {
        require_nonnull!(out);
        require_nonnull!(path);
        let raw = unsafe { CStr::from_ptr(path) };
        let Ok(path) = raw.to_str() else {
            set_error("path is not valid UTF-8");
            return SlogStatus::Utf8;
        };
        match Space::finite_from_csv(Path::new(path)) {
            Ok(space) => box_space(space, out),
            Err(e) => fail(e),
        }
    })
}

/// Releases a space handle. Null is a no-op.
///
/// # Safety
/// `space` must be null or a pointer previously returned by a
/// `slog_space_new_*` call that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn slog_space_free(space: *mut SlogSpace) {
    if !space.is_null() {
        drop(unsafe { Box::from_raw(space) });
    }
}

/// Writes the space diameter to `out`.
///
/// # Safety
/// `space` must be a live space handle and `out` a valid `double` slot.
#[no_mangle]
pub unsafe extern "C" fn slog_space_diameter(
    space: *const SlogSpace,
    out: *mut f64,
) -> SlogStatus {
    guard(|| {
        require_nonnull!(space);
        require_nonnull!(out);
        unsafe { *out = (*space).0.diameter() };
        SlogStatus::Ok
    })
}

/// Writes the per-point coordinate count of the space to `out` (1 for
/// segments, circles and finite grids; 3 for the sphere).
///
/// # Safety
/// `space` must be a live space handle and `out` a valid `size_t` slot.
#[no_mangle]
pub unsafe extern "C" fn slog_space_point_len(
    space: *const SlogSpace,
    out: *mut usize,
) -> SlogStatus {
    guard(|| {
        require_nonnull!(space);
        require_nonnull!(out);
        unsafe { *out = (*space).0.param_len() };
        SlogStatus::Ok
    })
}

/// Evaluates the kernel d^-s * log(1/d)^t at distance `d` in [0, 1);
/// coincident points (d = 0) yield +inf for a nontrivial kernel.
///
/// # Safety
/// `out` must be a valid `double` slot.
#[no_mangle]
pub unsafe extern "C" fn slog_kernel_eval(s: f64, t: f64, d: f64, out: *mut f64) -> SlogStatus {
    guard(|| {
        require_nonnull!(out);
        let params = match KernelParams::new(s, t) {
            Ok(p) => p,
            Err(e) => return fail(e),
        };
        match kernel_eval(params, d) {
            Ok(v) => {
                unsafe { *out = v };
                SlogStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

fn configuration_from_raw(
    space: &Arc<Space>,
    points: *const f64,
    n: usize,
) -> Result<Configuration, Error> {
    let p = space.param_len();
    let len = n.checked_mul(p).ok_or_else(|| {
        Error::InvalidArgument(format!("point count {n} overflows the coordinate buffer"))
    })?;
    // Safety contract of the callers: points holds n * point_len doubles.
    let flat = unsafe { std::slice::from_raw_parts(points, len) };
    let pts = flat.chunks(p).map(<[f64]>::to_vec).collect();
    Configuration::new(Arc::clone(space), pts)
}

/// Evaluates the energy of `n` points (each `slog_space_point_len` doubles,
/// concatenated) over ordered pairs. `out_linear` receives the energy and
/// `out_log`, when non-null, its natural logarithm.
///
/// # Safety
/// `space` must be a live space handle, `points` must hold
/// `n * slog_space_point_len(space)` doubles, and `out_linear` must be a
/// valid `double` slot.
#[no_mangle]
pub unsafe extern "C" fn slog_energy_eval(
    space: *const SlogSpace,
    points: *const f64,
    n: usize,
    s: f64,
    t: f64,
    out_linear: *mut f64,
    out_log: *mut f64,
) -> SlogStatus {
    guard(|| {
        require_nonnull!(space);
        require_nonnull!(points);
        require_nonnull!(out_linear);
        let space = unsafe { &(*space).0 };
        let params = match KernelParams::new(s, t) {
            Ok(p) => p,
            Err(e) => return fail(e),
        };
        let config = match configuration_from_raw(space, points, n) {
            Ok(c) => c,
            Err(e) => return fail(e),
        };
        match energy(&config, params) {
            Ok(v) => {
                unsafe {
                    *out_linear = v.linear;
                    if !out_log.is_null() {
                        *out_log = v.log;
                    }
                }
                SlogStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Writes the smallest pairwise distance of the point set to `out`.
///
/// # Safety
/// Same buffer contract as `slog_energy_eval`.
#[no_mangle]
pub unsafe extern "C" fn slog_separation(
    space: *const SlogSpace,
    points: *const f64,
    n: usize,
    out: *mut f64,
) -> SlogStatus {
    guard(|| {
        require_nonnull!(space);
        require_nonnull!(points);
        require_nonnull!(out);
        let space = unsafe { &(*space).0 };
        match configuration_from_raw(space, points, n) {
            Ok(config) => {
                unsafe { *out = config.separation() };
                SlogStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

fn box_result(result: SlogResult, out: *mut *mut SlogResult) -> SlogStatus {
    // Safety contract of the callers: out is a valid, writable pointer.
    unsafe { *out = Box::into_raw(Box::new(result)) };
    SlogStatus::Ok
}

/// Minimizes the n-point energy at (s, t) with the multi-start solver.
/// `opts` may be null for defaults. On success `*out` owns a result handle.
///
/// # Safety
/// `space` must be a live space handle, `opts` null or a valid options
/// struct, and `out` a valid pointer to a `SlogResult*` slot.
#[no_mangle]
pub unsafe extern "C" fn slog_minimize(
    space: *const SlogSpace,
    n: usize,
    s: f64,
    t: f64,
    opts: *const SlogSolveOptions,
    out: *mut *mut SlogResult,
) -> SlogStatus {
    guard(|| {
        require_nonnull!(space);
        require_nonnull!(out);
        let space = unsafe { &(*space).0 };
        let options = if opts.is_null() {
            SolveOptions::default()
        } else {
            unsafe { *opts }.to_options()
        };
        let params = match KernelParams::new(s, t) {
            Ok(p) => p,
            Err(e) => return fail(e),
        };
        match minimize_energy(space, n, params, &options) {
            Ok(res) => box_result(
                SlogResult {
                    points: res.config.points().iter().flatten().copied().collect(),
                    point_len: space.param_len(),
                    n,
                    energy_linear: res.energy.linear,
                    energy_log: res.energy.log,
                    separation: res.config.separation(),
                    converged: res.converged,
                    starts_agreeing: res.starts_agreeing,
                },
                out,
            ),
            Err(e) => fail(e),
        }
    })
}

/// Finds an n-point best-packing (maximal separation) configuration.
/// The result's energies are NaN; `separation` holds the achieved value.
///
/// # Safety
/// Same contract as `slog_minimize`.
#[no_mangle]
pub unsafe extern "C" fn slog_best_packing(
    space: *const SlogSpace,
    n: usize,
    opts: *const SlogSolveOptions,
    out: *mut *mut SlogResult,
) -> SlogStatus {
    guard(|| {
        require_nonnull!(space);
        require_nonnull!(out);
        let space = unsafe { &(*space).0 };
        let options = if opts.is_null() {
            SolveOptions::default()
        } else {
            unsafe { *opts }.to_options()
        };
        match best_packing(space, n, &options) {
            Ok(res) => box_result(
                SlogResult {
                    points: res.config.points().iter().flatten().copied().collect(),
                    point_len: space.param_len(),
                    n,
                    energy_linear: f64::NAN,
                    energy_log: f64::NAN,
                    separation: res.delta,
                    converged: res.converged,
                    starts_agreeing: 0,
                },
                out,
            ),
            Err(e) => fail(e),
        }
    })
}

/// Releases a result handle. Null is a no-op.
///
/// # Safety
/// `result` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn slog_result_free(result: *mut SlogResult) {
    if !result.is_null() {
        drop(unsafe { Box::from_raw(result) });
    }
}

// The result getters are written out one by one (not via a macro): the
// header generator parses the source without expanding macros, and a getter
// that is missing from the header does not exist for C callers.

/// Writes the point count.
///
/// # Safety
/// `result` must be a live result handle and `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn slog_result_n(result: *const SlogResult, out: *mut usize) -> SlogStatus {
    guard(|| {
        require_nonnull!(result);
        require_nonnull!(out);
        unsafe { *out = (*result).n };
        SlogStatus::Ok
    })
}

/// Writes the per-point coordinate count.
///
/// # Safety
/// `result` must be a live result handle and `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn slog_result_point_len(
    result: *const SlogResult,
    out: *mut usize,
) -> SlogStatus {
    guard(|| {
        require_nonnull!(result);
        require_nonnull!(out);
        unsafe { *out = (*result).point_len };
        SlogStatus::Ok
    })
}

/// Writes the energy over ordered pairs (NaN for packing results).
///
/// # Safety
/// `result` must be a live result handle and `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn slog_result_energy(
    result: *const SlogResult,
    out: *mut f64,
) -> SlogStatus {
    guard(|| {
        require_nonnull!(result);
        require_nonnull!(out);
        unsafe { *out = (*result).energy_linear };
        SlogStatus::Ok
    })
}

/// Writes the natural log of the energy (NaN for packing results).
///
/// # Safety
/// `result` must be a live result handle and `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn slog_result_log_energy(
    result: *const SlogResult,
    out: *mut f64,
) -> SlogStatus {
    guard(|| {
        require_nonnull!(result);
        require_nonnull!(out);
        unsafe { *out = (*result).energy_log };
        SlogStatus::Ok
    })
}

/// Writes the smallest pairwise distance of the result points.
///
/// # Safety
/// `result` must be a live result handle and `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn slog_result_separation(
    result: *const SlogResult,
    out: *mut f64,
) -> SlogStatus {
    guard(|| {
        require_nonnull!(result);
        require_nonnull!(out);
        unsafe { *out = (*result).separation };
        SlogStatus::Ok
    })
}

/// Writes whether every reported figure came from a converged solve.
///
/// # Safety
/// `result` must be a live result handle and `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn slog_result_converged(
    result: *const SlogResult,
    out: *mut bool,
) -> SlogStatus {
    guard(|| {
        require_nonnull!(result);
        require_nonnull!(out);
        unsafe { *out = (*result).converged };
        SlogStatus::Ok
    })
}

/// Writes how many restarts agreed with the best energy found.
///
/// # Safety
/// `result` must be a live result handle and `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn slog_result_starts_agreeing(
    result: *const SlogResult,
    out: *mut usize,
) -> SlogStatus {
    guard(|| {
        require_nonnull!(result);
        require_nonnull!(out);
        unsafe { *out = (*result).starts_agreeing };
        SlogStatus::Ok
    })
}

/// Copies the result's points into `buf` as n * point_len doubles,
/// point-major. `cap` is the buffer length in doubles.
///
/// # Safety
/// `result` must be a live result handle and `buf` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn slog_result_points(
    result: *const SlogResult,
    buf: *mut f64,
    cap: usize,
) -> SlogStatus {
    guard(|| {
        require_nonnull!(result);
        require_nonnull!(buf);
        let points = unsafe { &(*result).points };
        if cap < points.len() {
            set_error(format!(
                "buffer holds {cap} doubles, result needs {}",
                points.len()
            ));
            return SlogStatus::InvalidArgument;
        }
        unsafe { std::ptr::copy_nonoverlapping(points.as_ptr(), buf, points.len()) };
        SlogStatus::Ok
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;
    use std::ptr;

    fn last_error_string() -> String {
        let needed = unsafe { slog_last_error(ptr::null_mut(), 0) };
        let mut buf = vec![0u8; needed + 1];
        unsafe { slog_last_error(buf.as_mut_ptr() as *mut c_char, buf.len()) };
        buf.truncate(needed);
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn minimize_on_the_circle_matches_the_closed_form() {
        let mut space = ptr::null_mut();
        assert_eq!(
            unsafe { slog_space_new_circle(0.1, false, &mut space) },
            SlogStatus::Ok
        );
        let mut result = ptr::null_mut();
        let opts = slog_solve_options_default();
        assert_eq!(
            unsafe { slog_minimize(space, 3, 1.0, 0.0, &opts, &mut result) },
            SlogStatus::Ok
        );

        let mut e = 0.0;
        assert_eq!(unsafe { slog_result_energy(result, &mut e) }, SlogStatus::Ok);
        let expected = 90.0 / std::f64::consts::PI;
        assert!((e - expected).abs() <= 1e-9 * expected, "e = {e}");

        let mut converged = false;
        assert_eq!(
            unsafe { slog_result_converged(result, &mut converged) },
            SlogStatus::Ok
        );
        assert!(converged);

        let (mut n, mut p) = (0usize, 0usize);
        assert_eq!(unsafe { slog_result_n(result, &mut n) }, SlogStatus::Ok);
        assert_eq!(unsafe { slog_result_point_len(result, &mut p) }, SlogStatus::Ok);
        assert_eq!((n, p), (3, 1));

        let mut pts = vec![0.0; n * p];
        assert_eq!(
            unsafe { slog_result_points(result, pts.as_mut_ptr(), pts.len()) },
            SlogStatus::Ok
        );
        let mut sep = 0.0;
        assert_eq!(
            unsafe { slog_separation(space, pts.as_ptr(), n, &mut sep) },
            SlogStatus::Ok
        );
        let third = 0.1 * std::f64::consts::TAU / 3.0;
        assert!((sep - third).abs() <= 1e-6, "sep = {sep}");

        let (mut el, mut ll) = (0.0, 0.0);
        assert_eq!(
            unsafe { slog_energy_eval(space, pts.as_ptr(), n, 1.0, 0.0, &mut el, &mut ll) },
            SlogStatus::Ok
        );
        assert!((el - e).abs() <= 1e-12 * e);
        assert!((ll - e.ln()).abs() <= 1e-12);

        unsafe {
            slog_result_free(result);
            slog_space_free(space);
        }
    }

    #[test]
    fn packing_on_the_segment_reaches_the_even_spacing() {
        let mut space = ptr::null_mut();
        assert_eq!(
            unsafe { slog_space_new_segment(0.0, 0.9, &mut space) },
            SlogStatus::Ok
        );
        let mut result = ptr::null_mut();
        assert_eq!(
            unsafe { slog_best_packing(space, 4, ptr::null(), &mut result) },
            SlogStatus::Ok
        );
        let mut delta = 0.0;
        assert_eq!(
            unsafe { slog_result_separation(result, &mut delta) },
            SlogStatus::Ok
        );
        assert!((delta - 0.3).abs() <= 1e-7, "delta = {delta}");
        let mut e = 0.0;
        assert_eq!(unsafe { slog_result_energy(result, &mut e) }, SlogStatus::Ok);
        assert!(e.is_nan());
        unsafe {
            slog_result_free(result);
            slog_space_free(space);
        }
    }

    #[test]
    fn kernel_eval_matches_the_formula() {
        let mut v = 0.0;
        assert_eq!(unsafe { slog_kernel_eval(2.0, 1.0, 0.5, &mut v) }, SlogStatus::Ok);
        let expected = 4.0 * 2.0f64.ln();
        assert!((v - expected).abs() <= 1e-15);
        assert_eq!(
            unsafe { slog_kernel_eval(2.0, 1.0, 1.5, &mut v) },
            SlogStatus::Domain
        );
    }

    #[test]
    fn oversized_segment_reports_invalid_space() {
        let mut space = ptr::null_mut();
        let status = unsafe { slog_space_new_segment(0.0, 1.2, &mut space) };
        assert_eq!(status, SlogStatus::InvalidSpace);
        assert!(space.is_null());
        assert!(last_error_string().contains("diameter"));
    }

    #[test]
    fn null_arguments_are_rejected_not_dereferenced() {
        assert_eq!(
            unsafe { slog_space_new_segment(0.0, 0.9, ptr::null_mut()) },
            SlogStatus::NullPointer
        );
        let mut out = 0.0;
        assert_eq!(
            unsafe { slog_space_diameter(ptr::null(), &mut out) },
            SlogStatus::NullPointer
        );
        assert_eq!(
            unsafe { slog_result_energy(ptr::null(), &mut out) },
            SlogStatus::NullPointer
        );
        unsafe {
            slog_space_free(ptr::null_mut());
            slog_result_free(ptr::null_mut());
        }
    }

    #[test]
    fn finite_space_loads_from_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let mut file = std::fs::File::create(&path).unwrap();
        writeln!(file, "0,0.4,0.9").unwrap();
        writeln!(file, "0.4,0,0.5").unwrap();
        writeln!(file, "0.9,0.5,0").unwrap();
        drop(file);

        let c_path = std::ffi::CString::new(path.to_str().unwrap()).unwrap();
        let mut space = ptr::null_mut();
        assert_eq!(
            unsafe { slog_space_new_finite_csv(c_path.as_ptr(), &mut space) },
            SlogStatus::Ok
        );
        let mut diam = 0.0;
        assert_eq!(unsafe { slog_space_diameter(space, &mut diam) }, SlogStatus::Ok);
        assert_eq!(diam, 0.9);

        let mut result = ptr::null_mut();
        assert_eq!(
            unsafe { slog_minimize(space, 2, 1.0, 0.0, ptr::null(), &mut result) },
            SlogStatus::Ok
        );
        let mut e = 0.0;
        assert_eq!(unsafe { slog_result_energy(result, &mut e) }, SlogStatus::Ok);
        assert!((e - 2.0 / 0.9).abs() <= 1e-12);
        unsafe {
            slog_result_free(result);
            slog_space_free(space);
        }
    }

    #[test]
    fn status_names_are_nonnull_c_strings() {
        for status in [
            SlogStatus::Ok,
            SlogStatus::Domain,
            SlogStatus::SolverFailure,
            SlogStatus::Panic,
        ] {
            let ptr = slog_status_name(status);
            assert!(!ptr.is_null());
            let text = unsafe { CStr::from_ptr(ptr) }.to_str().unwrap();
            assert!(!text.is_empty());
        }
    }
}
