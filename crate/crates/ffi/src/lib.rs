//! C ABI over the `lindspec` solver.
//!
//! Every fallible call returns an [`LsStatus`]. On failure the message is kept per
//! thread and can be read with [`ls_last_error`]. Handles are opaque and must be
//! released with their matching `*_free` function. Dense matrices cross the boundary
//! as separate real and imaginary `double` arrays of length `dim * dim` in row-major
//! order, where `dim` is [`ls_model_dimension`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use lindspec::dynamics::{basis_projector, emission_spectrum, evolve};
use lindspec::linalg::{c, CMatrix};
use lindspec::spectral::{full_eigensystem, LiouvilleEigensystem, SolverOptions};
use lindspec::{build_jc, build_jc_dephasing, build_tc2, BlockModel, Error};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DegenerateBlock = 3,
    Resonance = 4,
    DivergentSpectrum = 5,
    SizeGuard = 6,
    Numerical = 7,
    Panic = 8,
}

/// Opaque model handle.
pub struct LsModel {
    model: BlockModel,
}

/// Opaque eigensystem handle. Owns a copy of the model it was solved from.
pub struct LsEigensystem {
    model: BlockModel,
    sys: LiouvilleEigensystem,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn status_of(err: &Error) -> LsStatus {
    match err {
        Error::DegenerateBlock { .. } => LsStatus::DegenerateBlock,
        Error::Resonance { .. } => LsStatus::Resonance,
        Error::DivergentSpectrum(_) => LsStatus::DivergentSpectrum,
        Error::SizeGuard { .. } => LsStatus::SizeGuard,
        Error::Numerical(_) => LsStatus::Numerical,
        _ => LsStatus::InvalidArgument,
    }
}

struct Failure(LsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(LsStatus::NullPointer, format!("{what} is null"))
}

fn invalid(message: String) -> Failure {
    Failure(LsStatus::InvalidArgument, message)
}

/// Runs `f`, converting errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            LsStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            LsStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn write_matrix(m: &CMatrix, re: &mut [f64], im: &mut [f64]) {
    let d = m.ncols();
    for ((i, r), x) in re.iter_mut().enumerate().zip(im.iter_mut()) {
        let z = m[(i / d, i % d)];
        *r = z.re;
        *x = z.im;
    }
}

/// Message of the last failed call on this thread, or an empty string.
/// The pointer stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ls_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Single-emitter cavity model with photon cutoff `cutoff`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn ls_model_jc(
    g: f64,
    delta: f64,
    kappa: f64,
    gamma: f64,
    cutoff: usize,
    out: *mut *mut LsModel,
) -> LsStatus {
    guard(|| store(out, LsModel { model: build_jc(g, delta, kappa, gamma, cutoff)? }))
}

/// Single-emitter cavity model with pure emitter dephasing `gamma_z`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn ls_model_jc_dephasing(
    g: f64,
    delta: f64,
    kappa: f64,
    gamma: f64,
    gamma_z: f64,
    cutoff: usize,
    out: *mut *mut LsModel,
) -> LsStatus {
    guard(|| {
        let model = build_jc_dephasing(g, delta, kappa, gamma, gamma_z, cutoff)?;
        store(out, LsModel { model })
    })
}

/// Two emitters sharing one cavity mode.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn ls_model_tc2(
    g1: f64,
    g2: f64,
    delta1: f64,
    delta2: f64,
    gamma1: f64,
    gamma2: f64,
    kappa: f64,
    cutoff: usize,
    out: *mut *mut LsModel,
) -> LsStatus {
    guard(|| {
        let model = build_tc2(g1, g2, delta1, delta2, gamma1, gamma2, kappa, cutoff)?;
        store(out, LsModel { model })
    })
}

/// Hilbert-space dimension of the model, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a handle returned by a model builder.
#[no_mangle]
pub unsafe extern "C" fn ls_model_dimension(model: *const LsModel) -> usize {
    model.as_ref().map_or(0, |m| m.model.basis.total_dimension())
}

/// Releases a model handle. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_model_free(model: *mut LsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Computes the full Liouvillian eigensystem. Non-positive tolerances select the defaults.
///
/// # Safety
/// `model` must be a live model handle and `out` valid writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn ls_solve(
    model: *const LsModel,
    degeneracy_tol: f64,
    resonance_tol: f64,
    out: *mut *mut LsEigensystem,
) -> LsStatus {
    guard(|| {
        let model = &deref(model, "model")?.model;
        let mut opts = SolverOptions::default();
        if degeneracy_tol > 0.0 {
            opts.degeneracy_tol = Some(degeneracy_tol);
        }
        if resonance_tol > 0.0 {
            opts.resonance_tol = resonance_tol;
        }
        let sys = full_eigensystem(model, &opts)?;
        store(out, LsEigensystem { model: model.clone(), sys })
    })
}

/// Number of eigenmodes, `dim * dim`, or 0 for a null handle.
///
/// # Safety
/// `sys` must be null or a live eigensystem handle.
#[no_mangle]
pub unsafe extern "C" fn ls_eigensystem_len(sys: *const LsEigensystem) -> usize {
    sys.as_ref().map_or(0, |s| s.sys.len())
}

/// Hilbert-space dimension the eigensystem acts on, or 0 for a null handle.
///
/// # Safety
/// `sys` must be null or a live eigensystem handle.
#[no_mangle]
pub unsafe extern "C" fn ls_eigensystem_dimension(sys: *const LsEigensystem) -> usize {
    sys.as_ref().map_or(0, |s| s.sys.basis.total_dimension())
}

/// Writes all eigenvalues, ordered as the modes, into two arrays of length `len`.
///
/// # Safety
/// `re` and `im` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ls_eigenvalues(sys: *const LsEigensystem, re: *mut f64, im: *mut f64, len: usize) -> LsStatus {
    guard(|| {
        let sys = &deref(sys, "eigensystem")?.sys;
        let values = sys.eigenvalues();
        if len != values.len() {
            return Err(invalid(format!("buffer length {len}, expected {}", values.len())));
        }
        let (re, im) = (slice_mut(re, len, "re")?, slice_mut(im, len, "im")?);
        for ((z, r), i) in values.iter().zip(re).zip(im) {
            *r = z.re;
            *i = z.im;
        }
        Ok(())
    })
}

/// Writes mode `index` as a dense operator. `left != 0` selects the left eigenvector.
///
/// # Safety
/// `re` and `im` must each point to `dim * dim` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ls_eigenvector(
    sys: *const LsEigensystem,
    index: usize,
    left: i32,
    re: *mut f64,
    im: *mut f64,
) -> LsStatus {
    guard(|| {
        let sys = &deref(sys, "eigensystem")?.sys;
        let modes = sys.modes();
        let mode = modes
            .get(index)
            .ok_or_else(|| invalid(format!("mode index {index} out of range 0..{}", modes.len())))?;
        let m = if left != 0 { mode.left_dense(&sys.basis) } else { mode.right_dense(&sys.basis) };
        let len = m.len();
        write_matrix(&m, slice_mut(re, len, "re")?, slice_mut(im, len, "im")?);
        Ok(())
    })
}

/// Propagates the density matrix `rho0` to time `t` and writes the result.
///
/// # Safety
/// All four arrays must hold `dim * dim` doubles; the output pair must be writable.
#[no_mangle]
pub unsafe extern "C" fn ls_evolve(
    sys: *const LsEigensystem,
    rho_re: *const f64,
    rho_im: *const f64,
    t: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> LsStatus {
    guard(|| {
        let sys = &deref(sys, "eigensystem")?.sys;
        let d = sys.basis.total_dimension();
        let (re, im) = (slice(rho_re, d * d, "rho_re")?, slice(rho_im, d * d, "rho_im")?);
        let rho0 = CMatrix::from_fn(d, d, |i, j| c(re[i * d + j], im[i * d + j]));
        let rho = evolve(&rho0, t, sys)?;
        write_matrix(&rho, slice_mut(out_re, d * d, "out_re")?, slice_mut(out_im, d * d, "out_im")?);
        Ok(())
    })
}

/// Emission spectrum of the model's emitter starting from basis state `(n, j)`,
/// with `j` 1-based inside excitation block `n`. Writes the unnormalized spectrum to
/// `s` and the normalized one to `normalized` (which may be null).
///
/// # Safety
/// `omega` and `s` must hold `points` doubles; `normalized` must be null or hold `points`.
#[no_mangle]
pub unsafe extern "C" fn ls_spectrum(
    sys: *const LsEigensystem,
    n: usize,
    j: usize,
    omega: *const f64,
    points: usize,
    s: *mut f64,
    normalized: *mut f64,
) -> LsStatus {
    guard(|| {
        let handle = deref(sys, "eigensystem")?;
        let rho0 = basis_projector(&handle.sys.basis, n, j)?;
        let grid = slice(omega, points, "omega")?;
        let res = emission_spectrum(&handle.sys, &rho0, grid, &handle.model.emitter)?;
        slice_mut(s, points, "s")?.copy_from_slice(&res.s);
        if !normalized.is_null() {
            slice_mut(normalized, points, "normalized")?.copy_from_slice(&res.normalized);
        }
        Ok(())
    })
}

/// Releases an eigensystem handle. Null is ignored.
///
/// # Safety
/// `sys` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_eigensystem_free(sys: *mut LsEigensystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}
