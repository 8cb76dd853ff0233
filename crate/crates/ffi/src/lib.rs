//! C ABI for the `ebf` crate.
//!
//! Every function returns an [`EbfStatus`]. On failure a message is kept per
//! thread and can be read with [`ebf_last_error`]. Objects are handed out as
//! opaque pointers and must be released with the matching `_free` function.
//! Arrays are row-major `double` buffers of `height * width` entries.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, UnwindSafe};
use std::ptr;
use std::slice;

use ebf::kkt::{gamma_family_kkt_points, global_kkt_minimizer, KktClass, KktPoint, ScalarProblem};
use ebf::palm::{palm_solve, PalmResult, SolverConfig, SurrogateMode, Termination};
use ebf::spectral::{blur_eigenvalues, dct2_forward, dct2_inverse, ImageGrid, SpectralOperator};
use ebf::{Curvature, EbfError, Hyperprior, PriorKind};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EbfStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    ShapeMismatch = 3,
    NoGuaranteedSurrogate = 4,
    Numerical = 5,
    Io = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EbfPriorKind {
    None = 0,
    Gamma = 1,
    InverseGamma = 2,
    HalfGaussian = 3,
    HalfLaplace = 4,
    HalfGeneralizedGaussian = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EbfCurvature {
    Convex = 0,
    Concave = 1,
    Neither = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EbfKktClass {
    ZeroGlobal = 0,
    ZeroLocal = 1,
    PositiveLocal = 2,
    PositiveStationary = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EbfSurrogate {
    Auto = 0,
    LinearizeLogDetOnly = 1,
    LinearizeAll = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EbfKktPoint {
    pub gamma: f64,
    pub multiplier: f64,
    pub classification: EbfKktClass,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EbfSolverConfig {
    pub tau: f64,
    pub omega: f64,
    pub max_iter: usize,
    pub rel_tol: f64,
    pub surrogate: EbfSurrogate,
}

/// Opaque hyperprior handle.
pub struct EbfPrior(Hyperprior);

/// Opaque solver result handle.
pub struct EbfSolveResult(PalmResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &EbfError) -> EbfStatus {
    match e {
        EbfError::InvalidParameter(_) | EbfError::Parse { .. } | EbfError::ZeroNormTruth => EbfStatus::InvalidArgument,
        EbfError::ShapeMismatch { .. } => EbfStatus::ShapeMismatch,
        EbfError::NoGuaranteedSurrogate => EbfStatus::NoGuaranteedSurrogate,
        EbfError::DegeneratePolynomial
        | EbfError::NoStationaryPoint { .. }
        | EbfError::SubproblemNoRoot { .. }
        | EbfError::NonFiniteObjective { .. } => EbfStatus::Numerical,
        EbfError::Pgm(_) | EbfError::Io(_) => EbfStatus::Io,
    }
}

enum Failure {
    Lib(EbfError),
    Status(EbfStatus, String),
}

impl From<EbfError> for Failure {
    fn from(e: EbfError) -> Self {
        Failure::Lib(e)
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(EbfStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, translating errors and panics into a status code.
fn guard<F: FnOnce() -> Result<(), Failure> + UnwindSafe>(f: F) -> EbfStatus {
    match catch_unwind(f) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            EbfStatus::Ok
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            EbfStatus::Panic
        }
    }
}

unsafe fn input<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

fn area(height: usize, width: usize) -> Result<usize, Failure> {
    if height == 0 || width == 0 {
        return Err(EbfError::InvalidParameter("image dimensions must be positive".into()).into());
    }
    height.checked_mul(width).ok_or_else(|| Failure::Status(EbfStatus::InvalidArgument, "image too large".into()))
}

fn opt(v: f64) -> Option<f64> {
    if v.is_nan() {
        None
    } else {
        Some(v)
    }
}

fn kind_from(k: EbfPriorKind) -> PriorKind {
    match k {
        EbfPriorKind::None => PriorKind::None,
        EbfPriorKind::Gamma => PriorKind::Gamma,
        EbfPriorKind::InverseGamma => PriorKind::InverseGamma,
        EbfPriorKind::HalfGaussian => PriorKind::HalfGaussian,
        EbfPriorKind::HalfLaplace => PriorKind::HalfLaplace,
        EbfPriorKind::HalfGeneralizedGaussian => PriorKind::HalfGeneralizedGaussian,
    }
}

fn class_to(c: KktClass) -> EbfKktClass {
    match c {
        KktClass::ZeroGlobal => EbfKktClass::ZeroGlobal,
        KktClass::ZeroLocal => EbfKktClass::ZeroLocal,
        KktClass::PositiveLocal => EbfKktClass::PositiveLocal,
        KktClass::PositiveStationary => EbfKktClass::PositiveStationary,
    }
}

fn point_to(p: &KktPoint) -> EbfKktPoint {
    EbfKktPoint { gamma: p.gamma, multiplier: p.multiplier, classification: class_to(p.classification) }
}

/// Message for the last failed call on this thread, or NULL after a success.
/// The pointer stays valid until the next `ebf_` call on the same thread.
#[no_mangle]
pub extern "C" fn ebf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates a hyperprior. Parameters a kind does not use are ignored; pass NaN
/// for them. Gamma and InverseGamma use `alpha` and `beta`, HalfGaussian
/// `theta`, HalfLaplace `beta`, HalfGeneralizedGaussian `zeta` and `beta`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn ebf_prior_new(
    kind: EbfPriorKind,
    alpha: f64,
    beta: f64,
    zeta: f64,
    theta: f64,
    out: *mut *mut EbfPrior,
) -> EbfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let prior = Hyperprior::from_parts(kind_from(kind), opt(alpha), opt(beta), opt(zeta), opt(theta))?;
        *out = Box::into_raw(Box::new(EbfPrior(prior)));
        Ok(())
    })
}

/// # Safety
/// `prior` must be NULL or a handle from [`ebf_prior_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ebf_prior_free(prior: *mut EbfPrior) {
    if !prior.is_null() {
        drop(Box::from_raw(prior));
    }
}

unsafe fn prior_ref<'a>(p: *const EbfPrior) -> Result<&'a Hyperprior, Failure> {
    p.as_ref().map(|p| &p.0).ok_or_else(|| null("prior"))
}

/// H(γ) for γ ≥ 0; may be ±infinity at γ = 0.
///
/// # Safety
/// `prior` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ebf_prior_h_value(prior: *const EbfPrior, gamma: f64, out: *mut f64) -> EbfStatus {
    guard(|| {
        let p = prior_ref(prior)?;
        if !(gamma >= 0.0) {
            return Err(EbfError::InvalidParameter(format!("gamma must be >= 0, got {gamma}")).into());
        }
        *out.as_mut().ok_or_else(|| null("out"))? = p.h_value(gamma);
        Ok(())
    })
}

/// H'(γ) for γ > 0.
///
/// # Safety
/// `prior` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ebf_prior_h_prime(prior: *const EbfPrior, gamma: f64, out: *mut f64) -> EbfStatus {
    guard(|| {
        let p = prior_ref(prior)?;
        let v = p.h_prime(gamma)?;
        *out.as_mut().ok_or_else(|| null("out"))? = v;
        Ok(())
    })
}

/// # Safety
/// `prior` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ebf_prior_curvature(prior: *const EbfPrior, out: *mut EbfCurvature) -> EbfStatus {
    guard(|| {
        let c = match prior_ref(prior)?.curvature_class() {
            Curvature::Convex => EbfCurvature::Convex,
            Curvature::Concave => EbfCurvature::Concave,
            Curvature::Neither => EbfCurvature::Neither,
        };
        *out.as_mut().ok_or_else(|| null("out"))? = c;
        Ok(())
    })
}

/// Global minimizer of the scalar problem L(γ) over γ ≥ 0.
///
/// # Safety
/// `prior` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ebf_kkt_global_minimizer(
    p2: f64,
    q: f64,
    prior: *const EbfPrior,
    out: *mut EbfKktPoint,
) -> EbfStatus {
    guard(|| {
        let prob = ScalarProblem::new(p2, q, *prior_ref(prior)?)?;
        let best = global_kkt_minimizer(&prob)?;
        *out.as_mut().ok_or_else(|| null("out"))? = point_to(&best);
        Ok(())
    })
}

/// All KKT points of L, best first. Writes at most `capacity` points and
/// stores the total count in `out_len`; returns `BufferTooSmall` when
/// `capacity` is insufficient. `points` may be NULL when `capacity` is 0.
///
/// # Safety
/// `points` must have room for `capacity` entries and `out_len` be writable.
#[no_mangle]
pub unsafe extern "C" fn ebf_kkt_points(
    p2: f64,
    q: f64,
    prior: *const EbfPrior,
    points: *mut EbfKktPoint,
    capacity: usize,
    out_len: *mut usize,
) -> EbfStatus {
    guard(|| {
        let prob = ScalarProblem::new(p2, q, *prior_ref(prior)?)?;
        let all = gamma_family_kkt_points(&prob)?;
        *out_len.as_mut().ok_or_else(|| null("out_len"))? = all.len();
        if capacity > 0 {
            if points.is_null() {
                return Err(null("points"));
            }
            let dst = slice::from_raw_parts_mut(points, capacity);
            for (d, p) in dst.iter_mut().zip(&all) {
                *d = point_to(p);
            }
        }
        if capacity < all.len() {
            return Err(Failure::Status(
                EbfStatus::BufferTooSmall,
                format!("{} KKT points, room for {capacity}", all.len()),
            ));
        }
        Ok(())
    })
}

/// DCT-basis eigenvalues of the reflective Gaussian blur.
///
/// # Safety
/// `out` must have room for `height * width` doubles.
#[no_mangle]
pub unsafe extern "C" fn ebf_blur_eigenvalues(sigma_ker: f64, height: usize, width: usize, out: *mut f64) -> EbfStatus {
    guard(|| {
        let n = area(height, width)?;
        let dst = output(out, n, "out")?;
        dst.copy_from_slice(&blur_eigenvalues(sigma_ker, height, width)?);
        Ok(())
    })
}

/// Orthonormal 2-D DCT-II.
///
/// # Safety
/// `pixels` and `out` must each hold `height * width` doubles.
#[no_mangle]
pub unsafe extern "C" fn ebf_dct2_forward(pixels: *const f64, height: usize, width: usize, out: *mut f64) -> EbfStatus {
    guard(|| {
        let n = area(height, width)?;
        let img = ImageGrid::new(height, width, input(pixels, n, "pixels")?.to_vec())?;
        output(out, n, "out")?.copy_from_slice(&dct2_forward(&img));
        Ok(())
    })
}

/// Inverse of [`ebf_dct2_forward`].
///
/// # Safety
/// `coeffs` and `out` must each hold `height * width` doubles.
#[no_mangle]
pub unsafe extern "C" fn ebf_dct2_inverse(coeffs: *const f64, height: usize, width: usize, out: *mut f64) -> EbfStatus {
    guard(|| {
        let n = area(height, width)?;
        let img = dct2_inverse(input(coeffs, n, "coeffs")?, height, width)?;
        output(out, n, "out")?.copy_from_slice(img.pixels());
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn ebf_solver_config_default() -> EbfSolverConfig {
    let d = SolverConfig::default();
    EbfSolverConfig {
        tau: d.tau,
        omega: d.omega,
        max_iter: d.max_iter,
        rel_tol: d.rel_tol,
        surrogate: EbfSurrogate::Auto,
    }
}

fn config_from(c: &EbfSolverConfig) -> SolverConfig {
    SolverConfig {
        tau: c.tau,
        omega: c.omega,
        max_iter: c.max_iter,
        rel_tol: c.rel_tol,
        surrogate: match c.surrogate {
            EbfSurrogate::Auto => SurrogateMode::Auto,
            EbfSurrogate::LinearizeLogDetOnly => SurrogateMode::LinearizeLogDetOnly,
            EbfSurrogate::LinearizeAll => SurrogateMode::LinearizeAll,
        },
    }
}

/// Runs PALM on the deblurring model with eigenvalues `lambda` and noise
/// precision `sigma`. `gamma0` may be NULL, in which case |DCT(y)| is used
/// with zeros lifted to `omega`. `config` may be NULL for defaults.
///
/// # Safety
/// `lambda`, `y`, and a non-NULL `gamma0` must hold `height * width` doubles;
/// `prior` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ebf_palm_solve(
    lambda: *const f64,
    sigma: f64,
    height: usize,
    width: usize,
    y: *const f64,
    prior: *const EbfPrior,
    config: *const EbfSolverConfig,
    gamma0: *const f64,
    out: *mut *mut EbfSolveResult,
) -> EbfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let n = area(height, width)?;
        let op = SpectralOperator::new(input(lambda, n, "lambda")?.to_vec(), sigma, height, width)?;
        let obs = ImageGrid::new(height, width, input(y, n, "y")?.to_vec())?;
        let cfg = config.as_ref().map_or_else(SolverConfig::default, config_from);
        let g0: Vec<f64> = if gamma0.is_null() {
            let lift = cfg.omega.max(f64::MIN_POSITIVE);
            dct2_forward(&obs).iter().map(|v| if *v == 0.0 { lift } else { v.abs() }).collect()
        } else {
            input(gamma0, n, "gamma0")?.to_vec()
        };
        let res = palm_solve(&op, &obs, prior_ref(prior)?, &cfg, &g0)?;
        *out = Box::into_raw(Box::new(EbfSolveResult(res)));
        Ok(())
    })
}

/// # Safety
/// `result` must be NULL or a handle from [`ebf_palm_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ebf_result_free(result: *mut EbfSolveResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Number of coefficients, or 0 for NULL.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ebf_result_len(result: *const EbfSolveResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.x_final.len())
}

/// Iterations performed, or 0 for NULL.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ebf_result_iterations(result: *const EbfSolveResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.iterations())
}

/// True when the relative-change test stopped the run.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ebf_result_converged(result: *const EbfSolveResult) -> bool {
    result.as_ref().is_some_and(|r| r.0.termination == Termination::Converged)
}

/// Objective value after the last iteration, NaN for NULL.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ebf_result_final_objective(result: *const EbfSolveResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.0.final_objective())
}

unsafe fn copy_out(
    result: *const EbfSolveResult,
    out: *mut f64,
    len: usize,
    pick: fn(&PalmResult) -> Vec<f64>,
) -> EbfStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        let src = pick(&r.0);
        if len != src.len() {
            return Err(EbfError::ShapeMismatch { expected: src.len(), got: len }.into());
        }
        output(out, len, "out")?.copy_from_slice(&src);
        Ok(())
    })
}

/// Copies the coefficient vector x (length [`ebf_result_len`]).
///
/// # Safety
/// `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ebf_result_copy_x(result: *const EbfSolveResult, out: *mut f64, len: usize) -> EbfStatus {
    copy_out(result, out, len, |r| r.x_final.clone())
}

/// Copies the final hyperparameters γ (length [`ebf_result_len`]).
///
/// # Safety
/// `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ebf_result_copy_gamma(result: *const EbfSolveResult, out: *mut f64, len: usize) -> EbfStatus {
    copy_out(result, out, len, |r| r.gamma_final.gamma().to_vec())
}

/// Copies the objective trace J⁽⁰⁾..J⁽ᴷ⁾ (length iterations + 1).
///
/// # Safety
/// `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ebf_result_copy_objectives(
    result: *const EbfSolveResult,
    out: *mut f64,
    len: usize,
) -> EbfStatus {
    copy_out(result, out, len, |r| r.trace.objectives())
}
