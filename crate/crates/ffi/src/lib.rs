//! C ABI over gtl-core.
//!
//! States are opaque `GtlState` handles created by `gtl_state_*` and released
//! with `gtl_state_free`. Every fallible call returns a `GtlStatus`; on
//! anything other than `GTL_STATUS_OK` a message is available from
//! `gtl_last_error_message` on the same thread. Panics never cross the
//! boundary: they are caught and reported as `GTL_STATUS_PANIC`.
//!
//! Matrices are passed row-major as 2n×2n doubles in the (x₁…xₙ, p₁…pₙ)
//! ordering.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gtl_core::divergences::{gaussian_kl, trace_distance_bounds, GaussianDistribution};
use gtl_core::harness::{run_trial, Cell, Strategy};
use gtl_core::linalg::{Mat, Vector};
use gtl_core::state::{fidelity, vacuum_probability, GaussianState};
use gtl_core::symplectic::{validate_covariance, CovarianceMatrix, ValidityClass, VALIDITY_TOL};
use gtl_core::tomography::Calibration;
use gtl_core::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GtlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The covariance is not a physical state.
    InvalidState = 3,
    /// A factorization or eigen-solve failed.
    Numerical = 4,
    /// A learner gave up (abort, degenerate geometry, no convergence).
    AlgorithmFailure = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GtlValidity {
    Invalid = 0,
    MixedValid = 1,
    PureValid = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GtlStrategy {
    /// Non-adaptive single-mode protocol (n = 1).
    AlgS1 = 0,
    HeterodyneBaseline = 1,
    Pure = 2,
    Wigner = 3,
    Passive = 4,
}

impl From<GtlStrategy> for Strategy {
    fn from(s: GtlStrategy) -> Self {
        match s {
            GtlStrategy::AlgS1 => Strategy::AlgS1,
            GtlStrategy::HeterodyneBaseline => Strategy::HeterodyneBaseline,
            GtlStrategy::Pure => Strategy::Pure,
            GtlStrategy::Wigner => Strategy::Wigner,
            GtlStrategy::Passive => Strategy::Passive,
        }
    }
}

/// Opaque handle to a Gaussian state.
pub struct GtlState {
    inner: GaussianState,
}

/// Outcome of `gtl_learn`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtlLearnReport {
    /// Copies the oracle handed out.
    pub copies: u64,
    /// Achieved error in the strategy's metric.
    pub error: f64,
    /// error ≤ ε and the learner did not fail.
    pub success: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> GtlStatus {
    match e {
        Error::Domain(_) | Error::Parse(_) | Error::Io(_) | Error::DimensionMismatch { .. } | Error::Precondition(_) => {
            GtlStatus::InvalidArgument
        }
        Error::Asymmetric { .. }
        | Error::NotPositiveDefinite { .. }
        | Error::InvalidCovariance { .. }
        | Error::NotSymplectic { .. }
        | Error::Degenerate { .. } => GtlStatus::InvalidState,
        Error::SingularCovariance { .. } | Error::Chi2Undefined | Error::CutoffTooSmall { .. } => GtlStatus::Numerical,
        Error::AbortNoAngle { .. }
        | Error::DegenerateGeometry { .. }
        | Error::UnsqueezeExhausted { .. }
        | Error::ConstructionFailed { .. }
        | Error::Stage { .. } => GtlStatus::AlgorithmFailure,
    }
}

enum Fail {
    Null(&'static str),
    Arg(String),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

/// Runs `f`, converting errors and panics into a status plus last-error text.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> GtlStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GtlStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_last_error(&format!("null pointer: {what}"));
            GtlStatus::NullPointer
        }
        Ok(Err(Fail::Arg(msg))) => {
            set_last_error(&msg);
            GtlStatus::InvalidArgument
        }
        Ok(Err(Fail::Core(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            GtlStatus::Panic
        }
    }
}

unsafe fn state_ref<'a>(p: *const GtlState, what: &'static str) -> Result<&'a GaussianState, Fail> {
    p.as_ref().map(|s| &s.inner).ok_or(Fail::Null(what))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn read_covariance(n_modes: usize, sigma: *const f64) -> Result<Mat, Fail> {
    if sigma.is_null() {
        return Err(Fail::Null("sigma"));
    }
    if n_modes == 0 || n_modes > 1 << 12 {
        return Err(Fail::Arg(format!("n_modes must lie in 1..=4096, got {n_modes}")));
    }
    let d = 2 * n_modes;
    Ok(Mat::from_row_slice(d, d, std::slice::from_raw_parts(sigma, d * d)))
}

fn boxed(st: GaussianState) -> *mut GtlState {
    Box::into_raw(Box::new(GtlState { inner: st }))
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next gtl_* call on the same thread.
#[no_mangle]
pub extern "C" fn gtl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static NUL-terminated version string.
#[no_mangle]
pub extern "C" fn gtl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// New state from a mean of length 2n (NULL for zero) and a row-major 2n×2n
/// covariance.
///
/// # Safety
/// `mean` is NULL or points to 2n doubles; `sigma` points to 4n² doubles;
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn gtl_state_new(
    n_modes: usize,
    mean: *const f64,
    sigma: *const f64,
    out: *mut *mut GtlState,
) -> GtlStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let cov = read_covariance(n_modes, sigma)?;
        let mu = if mean.is_null() {
            Vector::zeros(2 * n_modes)
        } else {
            Vector::from_column_slice(std::slice::from_raw_parts(mean, 2 * n_modes))
        };
        *out = boxed(GaussianState::from_matrices(mu, cov)?);
        Ok(())
    })
}

/// n-mode vacuum.
///
/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn gtl_state_vacuum(n_modes: usize, out: *mut *mut GtlState) -> GtlStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if n_modes == 0 {
            return Err(Fail::Arg("n_modes must be at least 1".into()));
        }
        *out = boxed(GaussianState::vacuum(n_modes));
        Ok(())
    })
}

/// Single-mode state with covariance R(θ)diag(b, a)R(θ)ᵀ (variance b along
/// (cos θ, sin θ)) and mean (mx, mp).
///
/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn gtl_state_single_mode(
    mx: f64,
    mp: f64,
    b: f64,
    a: f64,
    theta: f64,
    out: *mut *mut GtlState,
) -> GtlStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = boxed(GaussianState::single_mode([mx, mp], b, a, theta)?);
        Ok(())
    })
}

/// Releases a state; NULL is ignored.
///
/// # Safety
/// `state` is NULL or came from a gtl_* constructor and was not freed.
#[no_mangle]
pub unsafe extern "C" fn gtl_state_free(state: *mut GtlState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `state` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn gtl_state_n_modes(state: *const GtlState, out: *mut usize) -> GtlStatus {
    guard(|| {
        *out_ref(out, "out")? = state_ref(state, "state")?.n_modes();
        Ok(())
    })
}

/// Copies the covariance, row-major, into `buf` of `len` = 4n² doubles.
///
/// # Safety
/// `state` is a live handle; `buf` points to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gtl_state_covariance(state: *const GtlState, buf: *mut f64, len: usize) -> GtlStatus {
    guard(|| {
        let s = state_ref(state, "state")?.sigma();
        if buf.is_null() {
            return Err(Fail::Null("buf"));
        }
        let d = s.nrows();
        if len != d * d {
            return Err(Fail::Arg(format!("buffer holds {len} doubles, need {}", d * d)));
        }
        let dst = std::slice::from_raw_parts_mut(buf, len);
        for i in 0..d {
            for j in 0..d {
                dst[i * d + j] = s[(i, j)];
            }
        }
        Ok(())
    })
}

/// Copies the mean into `buf` of `len` = 2n doubles.
///
/// # Safety
/// `state` is a live handle; `buf` points to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gtl_state_mean(state: *const GtlState, buf: *mut f64, len: usize) -> GtlStatus {
    guard(|| {
        let m = state_ref(state, "state")?.mean();
        if buf.is_null() {
            return Err(Fail::Null("buf"));
        }
        if len != m.len() {
            return Err(Fail::Arg(format!("buffer holds {len} doubles, need {}", m.len())));
        }
        std::slice::from_raw_parts_mut(buf, len).copy_from_slice(m.as_slice());
        Ok(())
    })
}

/// Classifies a covariance without building a state. `min_nu` (nullable)
/// receives the smallest symplectic eigenvalue, 0 when not positive definite.
///
/// # Safety
/// `sigma` points to 4n² doubles; `class_out` is writable; `min_nu` is NULL
/// or writable.
#[no_mangle]
pub unsafe extern "C" fn gtl_validate_covariance(
    n_modes: usize,
    sigma: *const f64,
    class_out: *mut GtlValidity,
    min_nu: *mut f64,
) -> GtlStatus {
    guard(|| {
        let class_out = out_ref(class_out, "class_out")?;
        let v = validate_covariance(&CovarianceMatrix::new(read_covariance(n_modes, sigma)?)?, VALIDITY_TOL)?;
        *class_out = match v.class {
            ValidityClass::Invalid => GtlValidity::Invalid,
            ValidityClass::MixedValid => GtlValidity::MixedValid,
            ValidityClass::PureValid => GtlValidity::PureValid,
        };
        if let Some(m) = min_nu.as_mut() {
            *m = v.min_nu;
        }
        Ok(())
    })
}

/// Squared Uhlmann fidelity.
///
/// # Safety
/// `a`, `b` are live handles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn gtl_fidelity(a: *const GtlState, b: *const GtlState, out: *mut f64) -> GtlStatus {
    guard(|| {
        *out_ref(out, "out")? = fidelity(state_ref(a, "a")?, state_ref(b, "b")?)?;
        Ok(())
    })
}

/// Probability of the all-vacuum photon-counting outcome.
///
/// # Safety
/// `state` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn gtl_vacuum_probability(state: *const GtlState, out: *mut f64) -> GtlStatus {
    guard(|| {
        *out_ref(out, "out")? = vacuum_probability(state_ref(state, "state")?);
        Ok(())
    })
}

/// Lower and upper bounds on the trace distance. `mc_samples` > 0 adds a
/// Monte-Carlo lower bound seeded by `seed`.
///
/// # Safety
/// `a`, `b` are live handles; `lower`, `upper` are writable.
#[no_mangle]
pub unsafe extern "C" fn gtl_trace_distance_bounds(
    a: *const GtlState,
    b: *const GtlState,
    mc_samples: u64,
    seed: u64,
    lower: *mut f64,
    upper: *mut f64,
) -> GtlStatus {
    guard(|| {
        let (lo, hi) = (out_ref(lower, "lower")?, out_ref(upper, "upper")?);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let br = trace_distance_bounds(state_ref(a, "a")?, state_ref(b, "b")?, mc_samples, &mut rng)?;
        *lo = br.lower;
        *hi = br.upper;
        Ok(())
    })
}

/// KL divergence between the two Wigner functions.
///
/// # Safety
/// `a`, `b` are live handles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn gtl_wigner_kl(a: *const GtlState, b: *const GtlState, out: *mut f64) -> GtlStatus {
    guard(|| {
        let (pa, pb) = (state_ref(a, "a")?, state_ref(b, "b")?);
        *out_ref(out, "out")? = gaussian_kl(&GaussianDistribution::wigner(pa), &GaussianDistribution::wigner(pb))?;
        Ok(())
    })
}

/// Learns `truth` from simulated measurements. `budget` = 0 uses the
/// strategy's calibrated copy count. The estimate (nullable out) must be
/// released with gtl_state_free. A learner that gives up is not a call
/// failure: the report then has success = false and error = 1, and
/// `estimate` is set to NULL.
///
/// # Safety
/// `truth` is a live handle; `report` is writable; `estimate` is NULL or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn gtl_learn(
    strategy: GtlStrategy,
    truth: *const GtlState,
    energy: f64,
    eps: f64,
    delta: f64,
    budget: u64,
    seed: u64,
    report: *mut GtlLearnReport,
    estimate: *mut *mut GtlState,
) -> GtlStatus {
    guard(|| {
        let report = out_ref(report, "report")?;
        if let Some(e) = estimate.as_mut() {
            *e = ptr::null_mut();
        }
        let truth = state_ref(truth, "truth")?.clone();
        if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
            return Err(Fail::Arg(format!("eps and delta must lie in (0, 1), got {eps}, {delta}")));
        }
        let cell = Cell {
            strategy: strategy.into(),
            n: truth.n_modes(),
            e: energy,
            eps,
            budget: (budget > 0).then_some(budget),
        };
        let o = run_trial("ffi", &cell, 0, seed, delta, &Calibration::FROZEN, Some(truth), false, false)?;
        *report = GtlLearnReport { copies: o.record.copies, error: o.record.error, success: o.record.success };
        if let Some(tag) = o.record.tags.strip_prefix("failed: ") {
            set_last_error(tag);
        }
        if let (Some(slot), Some(est)) = (estimate.as_mut(), o.estimate) {
            *slot = boxed(est);
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    #[test]
    fn panics_become_status() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, GtlStatus::Panic);
        let msg = unsafe { CStr::from_ptr(gtl_last_error_message()) };
        assert_eq!(msg.to_str().unwrap(), "panic: boom");
        assert_eq!(guard(|| Ok(())), GtlStatus::Ok);
        assert!(gtl_last_error_message().is_null());
    }

    #[test]
    fn error_kinds_map_to_statuses() {
        assert_eq!(status_of(&Error::InvalidCovariance { min_nu: 0.1 }), GtlStatus::InvalidState);
        assert_eq!(status_of(&Error::AbortNoAngle { side: "left" }), GtlStatus::AlgorithmFailure);
        assert_eq!(status_of(&Error::Domain("x".into())), GtlStatus::InvalidArgument);
    }

    #[test]
    fn version_is_nul_terminated() {
        let v = unsafe { CStr::from_ptr(gtl_version()) };
        assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
