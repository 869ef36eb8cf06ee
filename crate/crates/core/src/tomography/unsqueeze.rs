use super::estimators::{heterodyne_estimate, project_to_physical, project_to_pure};
use super::{check_unit, even_ceil, Calibration};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};
use crate::measurement::{GeneralDyneSeed, StateOracle};
use crate::symplectic::{symplectic_inverse, williamson};

/// A symplectic frame S in which the hidden covariance is close to vacuum.
#[derive(Debug, Clone)]
pub struct Unsqueezed {
    pub s: Mat,
    pub rounds: usize,
    pub copies: u64,
    /// Condition number of the last correction.
    pub last_kappa: f64,
}

/// ⌈log₂log₂(4E)⌉ + 3.
pub fn max_unsqueeze_rounds(e: f64) -> usize {
    let inner = (4.0 * e).log2().max(1.0).log2();
    inner.ceil().max(0.0) as usize + 3
}

pub fn adaptive_unsqueeze(oracle: &mut StateOracle, e: f64, delta: f64) -> Result<Unsqueezed> {
    adaptive_unsqueeze_with(oracle, e, delta, &Calibration::FROZEN)
}

/// Finds S with ‖(S⁻¹ΣS⁻ᵀ)⁻¹‖_op ≤ 4 (w.h.p.). Each round measures with seed
/// ½SSᵀ, which in the frame S is plain heterodyne, and S absorbs the
/// symplectic factor of the pure projection of the whitened estimate. The loop
/// stops once that correction has condition number ≤ `unsqueeze_stop`, i.e.
/// the frame has stabilised.
pub fn adaptive_unsqueeze_with(oracle: &mut StateOracle, e: f64, delta: f64, cal: &Calibration) -> Result<Unsqueezed> {
    if !(e >= 0.5) {
        return Err(Error::Domain(format!("energy bound must be ≥ ½, got {e}")));
    }
    check_unit("delta", delta)?;
    let n = oracle.n_modes();
    let cap = max_unsqueeze_rounds(e);
    let delta_t = delta / cap as f64;
    let m = even_ceil(cal.unsqueeze * (n as f64 + (1.0 / delta_t).ln()));
    let mut s = Mat::identity(2 * n, 2 * n);
    let mut copies = 0;
    let mut kappa = f64::INFINITY;
    for round in 1..=cap {
        let seed = GeneralDyneSeed::from_matrix(linalg::symmetrize(&(&s * s.transpose() * 0.5)))?;
        let samples = oracle.sample_general_dyne(&seed, m)?;
        copies += m;
        let s_inv = symplectic_inverse(&s);
        let white: Vec<Vector> = samples.iter().map(|v| &s_inv * v).collect();
        let (_, w) = heterodyne_estimate(&white)?;
        let target = project_to_pure(project_to_physical(&w)?.matrix())?;
        let (lam, _) = linalg::sym_eigen(target.matrix());
        kappa = lam[lam.len() - 1] / lam[0];
        s = &s * williamson(&target)?.s;
        if kappa <= cal.unsqueeze_stop {
            return Ok(Unsqueezed {
                s,
                rounds: round,
                copies,
                last_kappa: kappa,
            });
        }
    }
    Err(Error::UnsqueezeExhausted {
        rounds: cap,
        last_kappa: kappa,
    })
}
