use rand::Rng;

use super::estimators::{heterodyne_estimate, project_to_physical, project_to_pure};
use super::unsqueeze::adaptive_unsqueeze_with;
use super::{check_unit, even_ceil, Calibration, Diagnostics, TomographyResult};
use crate::divergences::GaussianDistribution;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};
use crate::measurement::{GeneralDyneSeed, StateOracle};
use crate::state::{embed_symplectic, is_passive, purification_covariance, reduce, GaussianState};
use crate::symplectic::{random_orthogonal_symplectic, symplectic_inverse};

/// 2m = C·(n² + n·ln(1/δ))/ε², rounded up to even.
pub fn pure_stage_copies(n: usize, eps: f64, delta: f64, constant: f64) -> u64 {
    let n = n as f64;
    even_ceil(constant * (n * n + n * (1.0 / delta).ln()) / (eps * eps))
}

fn check_modes(oracle: &StateOracle, n: usize) -> Result<()> {
    if oracle.n_modes() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: oracle.n_modes(),
        });
    }
    Ok(())
}

/// Unsqueezes, then measures `copies` with seed ½SSᵀ and returns S together
/// with the moment estimates expressed in the frame S.
fn measure_in_frame(
    oracle: &mut StateOracle,
    e: f64,
    delta: f64,
    copies: u64,
    cal: &Calibration,
    diag: &mut Diagnostics,
) -> Result<(Mat, Vector, Mat)> {
    let u = adaptive_unsqueeze_with(oracle, e, delta, cal).map_err(|err| err.at_stage("unsqueeze"))?;
    diag.push("unsqueeze", u.copies);
    diag.unsqueeze_rounds = Some(u.rounds);
    let seed = GeneralDyneSeed::from_matrix(linalg::symmetrize(&(&u.s * u.s.transpose() * 0.5)))
        .map_err(|err| err.at_stage("heterodyne"))?;
    let samples = oracle
        .sample_general_dyne(&seed, copies)
        .map_err(|err| err.at_stage("heterodyne"))?;
    diag.push("heterodyne", copies);
    let s_inv = symplectic_inverse(&u.s);
    let white: Vec<Vector> = samples.iter().map(|v| &s_inv * v).collect();
    let (mu_w, sigma_w) = heterodyne_estimate(&white).map_err(|err| err.at_stage("heterodyne"))?;
    Ok((u.s, mu_w, sigma_w))
}

fn finish(oracle: &StateOracle, start: u64, estimate: GaussianState, diagnostics: Diagnostics) -> TomographyResult {
    let copies_used = oracle.consumed() - start;
    debug_assert_eq!(copies_used, diagnostics.total_copies());
    TomographyResult {
        estimate,
        copies_used,
        diagnostics,
    }
}

pub fn learn_pure(oracle: &mut StateOracle, n: usize, e: f64, eps: f64, delta: f64) -> Result<TomographyResult> {
    learn_pure_with(oracle, n, e, eps, delta, &Calibration::FROZEN)
}

/// Pure-state learner: unsqueeze (δ/2), heterodyne in the unsqueezed frame on
/// 2m = C·(n² + n·ln(2/δ))/ε² copies, project the estimate to the nearest
/// pure covariance and map it back.
pub fn learn_pure_with(
    oracle: &mut StateOracle,
    n: usize,
    e: f64,
    eps: f64,
    delta: f64,
    cal: &Calibration,
) -> Result<TomographyResult> {
    check_modes(oracle, n)?;
    check_unit("eps", eps)?;
    check_unit("delta", delta)?;
    let start = oracle.consumed();
    let mut diag = Diagnostics::default();
    let copies = pure_stage_copies(n, eps, delta / 2.0, cal.pure_stage);
    let (s, mu_w, sigma_w) = measure_in_frame(oracle, e, delta / 2.0, copies, cal, &mut diag)?;
    let pure_w = match project_to_pure(&sigma_w) {
        Ok(p) => p,
        Err(_) => project_to_physical(&sigma_w).and_then(|p| project_to_pure(p.matrix()))?,
    };
    let sigma = linalg::symmetrize(&(&s * pure_w.matrix() * s.transpose()));
    let estimate = GaussianState::from_matrices(&s * mu_w, sigma).map_err(|err| err.at_stage("projection"))?;
    Ok(finish(oracle, start, estimate, diag))
}

/// A learned Wigner distribution and the copies it took.
#[derive(Debug, Clone)]
pub struct WignerEstimate {
    pub distribution: GaussianDistribution,
    pub copies_used: u64,
    pub diagnostics: Diagnostics,
}

pub fn learn_wigner(oracle: &mut StateOracle, n: usize, e: f64, eps: f64, delta: f64) -> Result<WignerEstimate> {
    learn_wigner_with(oracle, n, e, eps, delta, &Calibration::FROZEN)
}

/// Wigner learner: same two stages as the pure learner but the output is the
/// raw moment estimate N(μ̂, SΣ̂Sᵀ). A non-positive-definite Σ̂ has its
/// eigenvalues floored by [`project_to_physical`].
pub fn learn_wigner_with(
    oracle: &mut StateOracle,
    n: usize,
    e: f64,
    eps: f64,
    delta: f64,
    cal: &Calibration,
) -> Result<WignerEstimate> {
    check_modes(oracle, n)?;
    check_unit("eps", eps)?;
    check_unit("delta", delta)?;
    let start = oracle.consumed();
    let mut diag = Diagnostics::default();
    let copies = pure_stage_copies(n, eps, delta / 2.0, cal.wigner_stage);
    let (s, mu_w, mut sigma_w) = measure_in_frame(oracle, e, delta / 2.0, copies, cal, &mut diag)?;
    if linalg::min_eigenvalue(&sigma_w) <= 0.0 {
        sigma_w = project_to_physical(&sigma_w)?.into_matrix();
    }
    let sigma = linalg::symmetrize(&(&s * sigma_w * s.transpose()));
    let distribution = GaussianDistribution::new(&s * mu_w, sigma).map_err(|err| err.at_stage("projection"))?;
    let copies_used = oracle.consumed() - start;
    Ok(WignerEstimate {
        distribution,
        copies_used,
        diagnostics: diag,
    })
}

pub fn learn_passive_purified<R: Rng + ?Sized>(
    oracle: &mut StateOracle,
    n: usize,
    e: f64,
    eps: f64,
    delta: f64,
    rng: &mut R,
) -> Result<TomographyResult> {
    learn_passive_purified_with(oracle, n, e, eps, delta, rng, &Calibration::FROZEN)
}

/// Passive learner: each copy goes through a random purification channel
/// (simulated on the covariance: purify, then rotate the purifying half by one
/// random orthogonal symplectic), the pure learner runs on 2n modes with
/// energy bound 4E, and the first n modes of its estimate are returned. The
/// channel costs no extra copies.
pub fn learn_passive_purified_with<R: Rng + ?Sized>(
    oracle: &mut StateOracle,
    n: usize,
    e: f64,
    eps: f64,
    delta: f64,
    rng: &mut R,
    cal: &Calibration,
) -> Result<TomographyResult> {
    check_modes(oracle, n)?;
    if !is_passive(oracle.truth(), 1e-9) {
        return Err(Error::Precondition("hidden state is not passive".into()));
    }
    let start = oracle.consumed();
    let purified = purification_covariance(oracle.truth())?;
    let o = random_orthogonal_symplectic(n, rng);
    let channel = embed_symplectic(&o, n, 2 * n);
    let purified = crate::state::apply_symplectic(&purified, &channel)?;
    let mut child = oracle.derive(purified);
    let inner = learn_pure_with(&mut child, 2 * n, 4.0 * e, eps, delta, cal);
    oracle.charge(child.consumed());
    let inner = inner?;
    let modes: Vec<usize> = (0..n).collect();
    let estimate = reduce(&inner.estimate, &modes)?;
    Ok(finish(oracle, start, estimate, inner.diagnostics))
}

/// Energy-naive comparison arm with N = C·n²/ε² heterodyne copies.
pub fn heterodyne_baseline_learn(oracle: &mut StateOracle, n: usize, eps: f64) -> Result<TomographyResult> {
    check_modes(oracle, n)?;
    check_unit("eps", eps)?;
    let copies = even_ceil(Calibration::FROZEN.baseline * (n * n) as f64 / (eps * eps));
    heterodyne_baseline_with_budget(oracle, copies)
}

/// heterodyne_estimate + project_to_physical on a fixed number of copies
/// (rounded down to even, at least 2).
pub fn heterodyne_baseline_with_budget(oracle: &mut StateOracle, copies: u64) -> Result<TomographyResult> {
    let copies = (copies - copies % 2).max(2);
    let start = oracle.consumed();
    let n = oracle.n_modes();
    let samples = oracle.sample_general_dyne(&GeneralDyneSeed::heterodyne(n), copies)?;
    let (mu, sigma) = heterodyne_estimate(&samples)?;
    let estimate = GaussianState::new(mu, project_to_physical(&sigma)?)?;
    let mut diag = Diagnostics::default();
    diag.push("heterodyne", copies);
    Ok(finish(oracle, start, estimate, diag))
}
