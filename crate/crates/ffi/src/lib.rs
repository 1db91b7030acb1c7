//! C interface to the landscape solvers: opaque handles, integer status
//! codes, and a thread-local error message. Every function is panic-safe;
//! a caught panic reports `LL_PANIC` instead of unwinding across the
//! boundary. The committed header lives in `include/landscape_lab.h` and
//! is regenerated with the `generate-header` feature.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use landscape_lab::eigen::{lowest_eigenpairs, EigenPair};
use landscape_lab::grid::Grid1D;
use landscape_lab::landscape::{
    generalized_effective_potential, solve_landscape, LandscapeSolution,
};
use landscape_lab::operator::assemble_hamiltonian;
use landscape_lab::potential::{gen_piecewise_potential, Potential};
use landscape_lab::regularize::{default_time_scale, regularized_potential, BoundaryPolicy};
use landscape_lab::Error;

/// Success.
pub const LL_OK: i32 = 0;
/// A parameter was out of range or inconsistent.
pub const LL_INVALID_ARGUMENT: i32 = 1;
/// An iteration failed to converge or produced a non-finite value.
pub const LL_NUMERICAL: i32 = 2;
/// A required input was absent.
pub const LL_MISSING_INPUT: i32 = 3;
/// Text input could not be parsed.
pub const LL_PARSE: i32 = 4;
/// The operating system reported an I/O failure.
pub const LL_IO: i32 = 5;
/// A required pointer argument was null.
pub const LL_NULL_POINTER: i32 = 6;
/// The caller's buffer is shorter than the data.
pub const LL_BUFFER_TOO_SMALL: i32 = 7;
/// An internal panic was caught at the boundary.
pub const LL_PANIC: i32 = 8;

/// Half-sample reflection at the domain walls (the default).
pub const LL_BOUNDARY_REFLECT: i32 = 0;
/// Zero extension past the walls.
pub const LL_BOUNDARY_ZERO_PAD: i32 = 1;

/// A potential sampled on the interior nodes of a uniform grid on (0, 1).
pub struct LlPotential {
    inner: Potential,
}

/// Eigenpairs of -D_h + V, ordered from the bottom of the spectrum.
pub struct LlEigenSet {
    pairs: Vec<EigenPair>,
}

/// A landscape solve (-D_h + V) u = f together with its right-hand side.
pub struct LlLandscape {
    inner: LandscapeSolution,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    // Interior NULs cannot come from our error formatting; replace just in
    // case so the message is never silently dropped.
    let clean: String = msg
        .chars()
        .map(|c| if c == '\0' { ' ' } else { c })
        .collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).unwrap_or_default());
}

fn fail(err: Error) -> i32 {
    let code = match err {
        Error::InvalidArgument(_) => LL_INVALID_ARGUMENT,
        Error::Numerical(_) => LL_NUMERICAL,
        Error::MissingInput(_) => LL_MISSING_INPUT,
        Error::Parse(_) => LL_PARSE,
        Error::Io(_) => LL_IO,
    };
    set_error(&err.to_string());
    code
}

fn fail_null(what: &str) -> i32 {
    set_error(&format!("null pointer: {what}"));
    LL_NULL_POINTER
}

fn fail_buffer(needed: usize, got: usize) -> i32 {
    set_error(&format!(
        "buffer too small: need {needed} values, got {got}"
    ));
    LL_BUFFER_TOO_SMALL
}

fn guarded(f: impl FnOnce() -> i32) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(_) => {
            set_error("internal panic caught at the C boundary");
            LL_PANIC
        }
    }
}

fn policy_from(code: i32) -> Result<BoundaryPolicy, Error> {
    match code {
        LL_BOUNDARY_REFLECT => Ok(BoundaryPolicy::Reflect),
        LL_BOUNDARY_ZERO_PAD => Ok(BoundaryPolicy::ZeroPad),
        other => Err(Error::InvalidArgument(format!(
            "unknown boundary policy code {other}"
        ))),
    }
}

fn write_slice(src: &[f64], buf: *mut f64, len: usize) -> i32 {
    if buf.is_null() {
        return fail_null("output buffer");
    }
    if len < src.len() {
        return fail_buffer(src.len(), len);
    }
    unsafe { std::ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len()) };
    LL_OK
}

fn emit<T>(handle: T, out: *mut *mut T) -> i32 {
    if out.is_null() {
        return fail_null("output handle");
    }
    unsafe { *out = Box::into_raw(Box::new(handle)) };
    LL_OK
}

/// Version string of the underlying library; static storage, never freed.
#[no_mangle]
pub extern "C" fn ll_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the most recent failure on the calling thread. The pointer
/// stays valid until the next failing call on the same thread. Never null;
/// empty before any failure.
#[no_mangle]
pub extern "C" fn ll_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Generate a piecewise-constant random potential: `n` interior nodes,
/// `intervals` equal blocks with independent heights in [0, vmax].
///
/// # Safety
/// `out` must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn ll_potential_generate(
    n: usize,
    intervals: usize,
    vmax: f64,
    seed: u64,
    out: *mut *mut LlPotential,
) -> i32 {
    guarded(|| {
        let build = || -> Result<LlPotential, Error> {
            let grid = Grid1D::new(n)?;
            let inner = gen_piecewise_potential(&grid, intervals, vmax, seed)?;
            Ok(LlPotential { inner })
        };
        match build() {
            Ok(p) => emit(p, out),
            Err(e) => fail(e),
        }
    })
}

/// Wrap caller-provided node values (copied) as a potential on the uniform
/// grid with `len` interior nodes.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must point to
/// writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn ll_potential_from_values(
    values: *const f64,
    len: usize,
    out: *mut *mut LlPotential,
) -> i32 {
    guarded(|| {
        if values.is_null() {
            return fail_null("values");
        }
        let slice = unsafe { std::slice::from_raw_parts(values, len) };
        let build = || -> Result<LlPotential, Error> {
            let grid = Grid1D::new(len)?;
            let inner = Potential::new(grid, slice.to_vec(), "caller values")?;
            Ok(LlPotential { inner })
        };
        match build() {
            Ok(p) => emit(p, out),
            Err(e) => fail(e),
        }
    })
}

/// Release a potential handle. Null is a no-op.
///
/// # Safety
/// `p` must be a pointer previously returned by this library and not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn ll_potential_free(p: *mut LlPotential) {
    if !p.is_null() {
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Number of interior nodes, or 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ll_potential_len(p: *const LlPotential) -> usize {
    unsafe { p.as_ref() }.map_or(0, |p| p.inner.values().len())
}

/// Copy the node values into `buf` (capacity `len`).
///
/// # Safety
/// `p` must be a live handle; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ll_potential_values(
    p: *const LlPotential,
    buf: *mut f64,
    len: usize,
) -> i32 {
    guarded(|| match unsafe { p.as_ref() } {
        None => fail_null("potential"),
        Some(p) => write_slice(p.inner.values(), buf, len),
    })
}

/// Sup norm of the potential.
///
/// # Safety
/// `p` must be a live handle; `out` must point to one writable double.
#[no_mangle]
pub unsafe extern "C" fn ll_potential_sup(p: *const LlPotential, out: *mut f64) -> i32 {
    guarded(|| match (unsafe { p.as_ref() }, unsafe { out.as_mut() }) {
        (Some(p), Some(out)) => {
            *out = p.inner.sup();
            LL_OK
        }
        (None, _) => fail_null("potential"),
        (_, None) => fail_null("out"),
    })
}

/// The potential's own smoothing time 1 / mean(V), clamped to a sane range.
///
/// # Safety
/// `p` must be a live handle; `out` must point to one writable double.
#[no_mangle]
pub unsafe extern "C" fn ll_potential_default_time_scale(
    p: *const LlPotential,
    out: *mut f64,
) -> i32 {
    guarded(|| match (unsafe { p.as_ref() }, unsafe { out.as_mut() }) {
        (Some(p), Some(out)) => {
            *out = default_time_scale(&p.inner);
            LL_OK
        }
        (None, _) => fail_null("potential"),
        (_, None) => fail_null("out"),
    })
}

/// Convolve with the averaged heat kernel at time `t`, returning a new
/// potential handle. `policy` is one of the LL_BOUNDARY_* codes.
///
/// # Safety
/// `p` must be a live handle; `out` must point to writable storage for one
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn ll_potential_smooth(
    p: *const LlPotential,
    t: f64,
    policy: i32,
    out: *mut *mut LlPotential,
) -> i32 {
    guarded(|| {
        let Some(p) = (unsafe { p.as_ref() }) else {
            return fail_null("potential");
        };
        let build = || -> Result<LlPotential, Error> {
            let policy = policy_from(policy)?;
            let vt = regularized_potential(&p.inner, t, policy)?;
            let grid = p.inner.grid().clone();
            let inner = Potential::new(grid, vt.into_values(), format!("smoothed t={t}"))?;
            Ok(LlPotential { inner })
        };
        match build() {
            Ok(s) => emit(s, out),
            Err(e) => fail(e),
        }
    })
}

/// Solve for the `k` lowest eigenpairs of -D_h + V.
///
/// # Safety
/// `p` must be a live handle; `out` must point to writable storage for one
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn ll_eigenpairs_solve(
    p: *const LlPotential,
    k: usize,
    out: *mut *mut LlEigenSet,
) -> i32 {
    guarded(|| {
        let Some(p) = (unsafe { p.as_ref() }) else {
            return fail_null("potential");
        };
        let build = || -> Result<LlEigenSet, Error> {
            let op = assemble_hamiltonian(p.inner.grid(), &p.inner)?;
            Ok(LlEigenSet {
                pairs: lowest_eigenpairs(&op, k)?,
            })
        };
        match build() {
            Ok(s) => emit(s, out),
            Err(e) => fail(e),
        }
    })
}

/// Release an eigenpair set. Null is a no-op.
///
/// # Safety
/// `s` must be a pointer previously returned by this library and not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn ll_eigenset_free(s: *mut LlEigenSet) {
    if !s.is_null() {
        drop(unsafe { Box::from_raw(s) });
    }
}

/// Number of pairs in the set, or 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ll_eigenset_len(s: *const LlEigenSet) -> usize {
    unsafe { s.as_ref() }.map_or(0, |s| s.pairs.len())
}

/// Eigenvalue of pair `i` (0-based, ordered from the bottom).
///
/// # Safety
/// `s` must be a live handle; `out` must point to one writable double.
#[no_mangle]
pub unsafe extern "C" fn ll_eigenset_lambda(s: *const LlEigenSet, i: usize, out: *mut f64) -> i32 {
    guarded(|| {
        let Some(s) = (unsafe { s.as_ref() }) else {
            return fail_null("eigenset");
        };
        let Some(out) = (unsafe { out.as_mut() }) else {
            return fail_null("out");
        };
        match s.pairs.get(i) {
            Some(p) => {
                *out = p.lambda;
                LL_OK
            }
            None => fail(Error::InvalidArgument(format!(
                "pair index {i} out of range ({} pairs)",
                s.pairs.len()
            ))),
        }
    })
}

/// Worst-node residual of pair `i`, the solver's own accuracy witness.
///
/// # Safety
/// `s` must be a live handle; `out` must point to one writable double.
#[no_mangle]
pub unsafe extern "C" fn ll_eigenset_residual(
    s: *const LlEigenSet,
    i: usize,
    out: *mut f64,
) -> i32 {
    guarded(|| {
        let Some(s) = (unsafe { s.as_ref() }) else {
            return fail_null("eigenset");
        };
        let Some(out) = (unsafe { out.as_mut() }) else {
            return fail_null("out");
        };
        match s.pairs.get(i) {
            Some(p) => {
                *out = p.residual;
                LL_OK
            }
            None => fail(Error::InvalidArgument(format!(
                "pair index {i} out of range ({} pairs)",
                s.pairs.len()
            ))),
        }
    })
}

/// Copy the sup-normalized eigenvector of pair `i` into `buf`.
///
/// # Safety
/// `s` must be a live handle; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ll_eigenset_vector(
    s: *const LlEigenSet,
    i: usize,
    buf: *mut f64,
    len: usize,
) -> i32 {
    guarded(|| {
        let Some(s) = (unsafe { s.as_ref() }) else {
            return fail_null("eigenset");
        };
        match s.pairs.get(i) {
            Some(p) => write_slice(&p.phi, buf, len),
            None => fail(Error::InvalidArgument(format!(
                "pair index {i} out of range ({} pairs)",
                s.pairs.len()
            ))),
        }
    })
}

/// Solve (-D_h + V) u = f. A null `rhs` means f = 1 at every node;
/// otherwise `rhs_len` must match the potential's node count.
///
/// # Safety
/// `p` must be a live handle; `rhs` must be null or point to `rhs_len`
/// readable doubles; `out` must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn ll_landscape_solve(
    p: *const LlPotential,
    rhs: *const f64,
    rhs_len: usize,
    out: *mut *mut LlLandscape,
) -> i32 {
    guarded(|| {
        let Some(p) = (unsafe { p.as_ref() }) else {
            return fail_null("potential");
        };
        let n = p.inner.values().len();
        let f: Vec<f64> = if rhs.is_null() {
            vec![1.0; n]
        } else {
            if rhs_len != n {
                return fail(Error::InvalidArgument(format!(
                    "rhs length {rhs_len} does not match the {n}-node grid"
                )));
            }
            unsafe { std::slice::from_raw_parts(rhs, rhs_len) }.to_vec()
        };
        let build = || -> Result<LlLandscape, Error> {
            let op = assemble_hamiltonian(p.inner.grid(), &p.inner)?;
            Ok(LlLandscape {
                inner: solve_landscape(&op, &f)?,
            })
        };
        match build() {
            Ok(s) => emit(s, out),
            Err(e) => fail(e),
        }
    })
}

/// Release a landscape handle. Null is a no-op.
///
/// # Safety
/// `s` must be a pointer previously returned by this library and not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn ll_landscape_free(s: *mut LlLandscape) {
    if !s.is_null() {
        drop(unsafe { Box::from_raw(s) });
    }
}

/// Number of nodes in the solution, or 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ll_landscape_len(s: *const LlLandscape) -> usize {
    unsafe { s.as_ref() }.map_or(0, |s| s.inner.values().len())
}

/// Copy the solution values into `buf`.
///
/// # Safety
/// `s` must be a live handle; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ll_landscape_values(
    s: *const LlLandscape,
    buf: *mut f64,
    len: usize,
) -> i32 {
    guarded(|| match unsafe { s.as_ref() } {
        None => fail_null("landscape"),
        Some(s) => write_slice(s.inner.values(), buf, len),
    })
}

/// Effective potential (f * k_t) / u of the stored solve, written into
/// `buf`. With the constant right-hand side this is 1/u.
///
/// # Safety
/// `s` must be a live handle; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ll_landscape_effective_potential(
    s: *const LlLandscape,
    t: f64,
    policy: i32,
    buf: *mut f64,
    len: usize,
) -> i32 {
    guarded(|| {
        let Some(s) = (unsafe { s.as_ref() }) else {
            return fail_null("landscape");
        };
        let build = || -> Result<Vec<f64>, Error> {
            let policy = policy_from(policy)?;
            generalized_effective_potential(&s.inner, t, policy)
        };
        match build() {
            Ok(w) => write_slice(&w, buf, len),
            Err(e) => fail(e),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last_message() -> String {
        unsafe { std::ffi::CStr::from_ptr(ll_last_error_message()) }
            .to_string_lossy()
            .into_owned()
    }

    #[test]
    fn round_trip_through_the_c_surface() {
        unsafe {
            let mut p: *mut LlPotential = std::ptr::null_mut();
            assert_eq!(ll_potential_generate(200, 8, 1e3, 5, &mut p), LL_OK);
            assert_eq!(ll_potential_len(p), 200);

            let mut values = vec![0.0; 200];
            assert_eq!(
                ll_potential_values(p, values.as_mut_ptr(), values.len()),
                LL_OK
            );
            let mut sup = 0.0;
            assert_eq!(ll_potential_sup(p, &mut sup), LL_OK);
            assert_eq!(sup, values.iter().fold(0.0f64, |a, v| a.max(v.abs())));

            let mut smooth: *mut LlPotential = std::ptr::null_mut();
            assert_eq!(
                ll_potential_smooth(p, 1e-4, LL_BOUNDARY_REFLECT, &mut smooth),
                LL_OK
            );
            let mut smoothed = vec![0.0; 200];
            assert_eq!(
                ll_potential_values(smooth, smoothed.as_mut_ptr(), 200),
                LL_OK
            );
            let smooth_sup = smoothed.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            assert!(smooth_sup <= sup * (1.0 + 1e-12));

            let mut eig: *mut LlEigenSet = std::ptr::null_mut();
            assert_eq!(ll_eigenpairs_solve(p, 3, &mut eig), LL_OK);
            assert_eq!(ll_eigenset_len(eig), 3);
            let mut lambda = [0.0; 3];
            for (i, l) in lambda.iter_mut().enumerate() {
                assert_eq!(ll_eigenset_lambda(eig, i, l), LL_OK);
            }
            assert!(lambda[0] < lambda[1] && lambda[1] < lambda[2]);
            let mut phi = vec![0.0; 200];
            assert_eq!(ll_eigenset_vector(eig, 0, phi.as_mut_ptr(), 200), LL_OK);
            let phi_sup = phi.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            assert!(
                (phi_sup - 1.0).abs() < 1e-12,
                "eigenvector not sup-normalized"
            );

            let mut land: *mut LlLandscape = std::ptr::null_mut();
            assert_eq!(ll_landscape_solve(p, std::ptr::null(), 0, &mut land), LL_OK);
            let mut u = vec![0.0; 200];
            assert_eq!(ll_landscape_values(land, u.as_mut_ptr(), 200), LL_OK);
            // the pointwise bound |phi| <= lambda u sup|phi| at the C surface
            for i in 0..200 {
                assert!(phi[i].abs() <= lambda[0] * u[i] * phi_sup + 1e-10);
            }

            let mut w = vec![0.0; 200];
            assert_eq!(
                ll_landscape_effective_potential(
                    land,
                    0.0,
                    LL_BOUNDARY_REFLECT,
                    w.as_mut_ptr(),
                    200
                ),
                LL_OK
            );
            for i in 0..200 {
                assert!((w[i] - 1.0 / u[i]).abs() <= 1e-10 / u[i]);
            }

            ll_landscape_free(land);
            ll_eigenset_free(eig);
            ll_potential_free(smooth);
            ll_potential_free(p);
        }
    }

    #[test]
    fn error_paths_set_codes_and_messages() {
        unsafe {
            let mut p: *mut LlPotential = std::ptr::null_mut();
            assert_eq!(
                ll_potential_generate(0, 4, 1.0, 1, &mut p),
                LL_INVALID_ARGUMENT
            );
            assert!(p.is_null());
            assert!(!last_message().is_empty());

            assert_eq!(ll_potential_generate(50, 4, 1.0, 1, &mut p), LL_OK);

            let mut short = vec![0.0; 10];
            assert_eq!(
                ll_potential_values(p, short.as_mut_ptr(), short.len()),
                LL_BUFFER_TOO_SMALL
            );
            assert!(last_message().contains("need 50"));

            let mut out = 0.0;
            assert_eq!(
                ll_potential_sup(std::ptr::null(), &mut out),
                LL_NULL_POINTER
            );
            assert!(last_message().contains("null pointer"));

            let mut smooth: *mut LlPotential = std::ptr::null_mut();
            assert_eq!(
                ll_potential_smooth(p, -1.0, LL_BOUNDARY_REFLECT, &mut smooth),
                LL_INVALID_ARGUMENT
            );
            assert_eq!(
                ll_potential_smooth(p, 1e-4, 9, &mut smooth),
                LL_INVALID_ARGUMENT
            );
            assert!(last_message().contains("boundary policy"));

            let mut eig: *mut LlEigenSet = std::ptr::null_mut();
            assert_eq!(ll_eigenpairs_solve(p, 2, &mut eig), LL_OK);
            let mut lambda = 0.0;
            assert_eq!(ll_eigenset_lambda(eig, 7, &mut lambda), LL_INVALID_ARGUMENT);
            assert!(last_message().contains("out of range"));

            let rhs = [1.0; 7];
            let mut land: *mut LlLandscape = std::ptr::null_mut();
            assert_eq!(
                ll_landscape_solve(p, rhs.as_ptr(), rhs.len(), &mut land),
                LL_INVALID_ARGUMENT
            );
            assert!(last_message().contains("does not match"));

            ll_eigenset_free(eig);
            ll_potential_free(p);
            ll_potential_free(std::ptr::null_mut());
            ll_eigenset_free(std::ptr::null_mut());
            ll_landscape_free(std::ptr::null_mut());
        }
    }

    #[test]
    fn version_is_a_static_c_string() {
        let v = unsafe { std::ffi::CStr::from_ptr(ll_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
