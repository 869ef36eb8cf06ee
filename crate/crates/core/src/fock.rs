//! Truncated-Fock oracle for single-mode Gaussian states and their tensor
//! products: dense density matrices and spectral distances used to check the
//! closed forms elsewhere in the crate.
//!
//! A single-mode state with mean μ, covariance Σ and ν = √det Σ is the Gibbs
//! state of its own number operator
//! N̂ = ½[(R̂−μ)ᵀ·νΣ⁻¹·(R̂−μ) − 1], with weights q^k, q = (ν−½)/(ν+½).
//! The oracle diagonalises the compression of N̂ to a working space a little
//! larger than the requested cutoff, so the mean needs no separate
//! displacement and a pure state is exactly the ground-state projector.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::state::GaussianState;

pub type CMat = DMatrix<Complex64>;

pub const MAX_CUTOFF: usize = 512;

/// Smallest d with q^d ≤ tol·(1−q), q = (E−½)/(E+½): a thermal state of
/// energy E then keeps tail mass ≤ tol beyond level d.
pub fn cutoff_for_energy(e: f64, tol: f64) -> Result<usize> {
    if !(e >= 0.5) {
        return Err(Error::Domain(format!("energy must be ≥ ½, got {e}")));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Domain(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    let q = (e - 0.5) / (e + 0.5);
    if q == 0.0 {
        return Ok(1);
    }
    Ok(((tol * (1.0 - q)).ln() / q.ln()).ceil().max(1.0) as usize)
}

/// Truncated x̂ = (â+â†)/√2 and p̂ = i(â†−â)/√2 on levels 0..m.
pub fn quadrature_operators(m: usize) -> (CMat, CMat) {
    let mut x = CMat::zeros(m, m);
    let mut p = CMat::zeros(m, m);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for k in 0..m.saturating_sub(1) {
        let s = ((k + 1) as f64).sqrt() * r;
        x[(k, k + 1)] = Complex64::new(s, 0.0);
        x[(k + 1, k)] = Complex64::new(s, 0.0);
        p[(k, k + 1)] = Complex64::new(0.0, -s);
        p[(k + 1, k)] = Complex64::new(0.0, s);
    }
    (x, p)
}

/// Whether to report overlap or Uhlmann fidelity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FidelityKind {
    /// Tr(ρσ), used when either state is pure.
    Overlap,
    /// (Tr√(√ρσ√ρ))², both mixed.
    Uhlmann,
}

/// A density matrix on levels 0..d (per mode), with the spectral data it was
/// built from: log-weights (−∞ for levels a pure state leaves empty) and
/// eigenvectors truncated to the d levels.
#[derive(Debug, Clone)]
pub struct FockDensity {
    cutoff: usize,
    modes: usize,
    matrix: CMat,
    truncation_mass: f64,
    pure: bool,
    log_weights: Vec<f64>,
    vectors: CMat,
}

impl FockDensity {
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// 1 − trace of the d-level block before renormalisation.
    pub fn truncation_mass(&self) -> f64 {
        self.truncation_mass
    }

    pub fn is_pure(&self) -> bool {
        self.pure
    }

    /// ⟨0|ρ|0⟩.
    pub fn vacuum_probability(&self) -> f64 {
        self.matrix[(0, 0)].re
    }

    /// −Σ w ln w from the construction weights.
    pub fn entropy(&self) -> f64 {
        self.log_weights
            .iter()
            .filter(|l| l.is_finite())
            .map(|&l| -l.exp() * l)
            .sum()
    }

    /// Tr(ρ·op) for an operator on the same levels.
    pub fn expectation(&self, op: &CMat) -> Complex64 {
        (&self.matrix * op).trace()
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

fn working_dimension(d: usize) -> usize {
    (d + (d / 4).max(16)).min(MAX_CUTOFF + 128)
}

/// Dense density matrix of a single-mode state on levels 0..d. Refuses when
/// more than 10·tol of the state lies above level d.
pub fn fock_density(state: &GaussianState, d: usize, tol: f64) -> Result<FockDensity> {
    if state.n_modes() != 1 {
        return Err(Error::Precondition(format!(
            "fock_density is single-mode; got {} modes (use fock_density_product)",
            state.n_modes()
        )));
    }
    if !(4..=MAX_CUTOFF).contains(&d) {
        return Err(Error::Domain(format!("cutoff must lie in [4, {MAX_CUTOFF}], got {d}")));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Domain(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    let big = working_dimension(d);
    let sigma = state.sigma();
    let nu = sigma.determinant().max(0.25).sqrt();
    let g = linalg::inverse_pd(sigma)? * nu;
    let mu = state.mean();
    // Products of tridiagonal operators built on big+1 levels and read off
    // on the first big, so every kept entry of the compression is exact.
    let (x, p) = quadrature_operators(big + 1);
    let c = |v: f64| Complex64::new(v, 0.0);
    let xs = shifted(&x, mu[0]);
    let ps = shifted(&p, mu[1]);
    let mut number = CMat::zeros(big, big);
    for i in 0..big {
        for j in i.saturating_sub(2)..(i + 3).min(big) {
            let mut v = Complex64::new(0.0, 0.0);
            for k in i.saturating_sub(1)..(i + 2).min(big + 1) {
                v += xs[(i, k)] * xs[(k, j)] * g[(0, 0)]
                    + ps[(i, k)] * ps[(k, j)] * g[(1, 1)]
                    + (xs[(i, k)] * ps[(k, j)] + ps[(i, k)] * xs[(k, j)]) * g[(0, 1)];
            }
            number[(i, j)] = v * 0.5;
        }
        number[(i, i)] -= c(0.5);
    }
    let number = hermitian_part(&number);
    let eig = number.symmetric_eigen();
    let mut order: Vec<usize> = (0..big).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let pure = state.is_pure();
    let log_q = if pure { f64::NEG_INFINITY } else { ((nu - 0.5) / (nu + 0.5)).ln() };
    let mut log_w: Vec<f64> = order
        .iter()
        .enumerate()
        .map(|(rank, &k)| {
            if pure {
                if rank == 0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            } else {
                eig.eigenvalues[k].max(0.0) * log_q
            }
        })
        .collect();
    let log_z = log_sum_exp(&log_w);
    for l in &mut log_w {
        *l -= log_z;
    }
    let vecs = CMat::from_columns(&order.iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect::<Vec<_>>());
    let rho_big = weighted_outer(&vecs, &log_w);
    let kept: f64 = (0..d).map(|i| rho_big[(i, i)].re).sum();
    let mass = (1.0 - kept).max(0.0);
    if mass > 10.0 * tol {
        let e_eff = linalg::op_norm_sym(sigma) + 0.5 * mu.norm_squared();
        let suggested = cutoff_for_energy(e_eff, tol)?.max(2 * d).min(MAX_CUTOFF);
        return Err(Error::CutoffTooSmall { cutoff: d, mass, suggested });
    }
    let matrix = hermitian_part(&(rho_big.view((0, 0), (d, d)).into_owned() / c(kept)));
    Ok(FockDensity {
        cutoff: d,
        modes: 1,
        matrix,
        truncation_mass: mass,
        pure,
        log_weights: log_w,
        vectors: vecs.rows(0, d).into_owned(),
    })
}

fn shifted(op: &CMat, by: f64) -> CMat {
    op - CMat::identity(op.nrows(), op.nrows()) * Complex64::new(by, 0.0)
}

/// Components whose weight is below this relative to the total do not
/// change any reported quantity at double precision.
const NEGLIGIBLE_LOG_WEIGHT: f64 = -50.0;

fn significant(log_w: &[f64]) -> Vec<usize> {
    (0..log_w.len()).filter(|&k| log_w[k] > NEGLIGIBLE_LOG_WEIGHT).collect()
}

/// Σ_k w_k v_k v_k† over the significant components.
fn weighted_outer(vecs: &CMat, log_w: &[f64]) -> CMat {
    let keep = significant(log_w);
    let cols: Vec<_> = keep
        .iter()
        .map(|&k| vecs.column(k) * Complex64::new((0.5 * log_w[k]).exp(), 0.0))
        .collect();
    let half = CMat::from_columns(&cols);
    &half * half.adjoint()
}

fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Tensor product of single-mode densities (all at the same cutoff).
pub fn tensor(parts: &[FockDensity]) -> Result<FockDensity> {
    let first = parts.first().ok_or_else(|| Error::Domain("empty tensor product".into()))?;
    let mut out = first.clone();
    for p in &parts[1..] {
        if p.cutoff != first.cutoff {
            return Err(Error::DimensionMismatch { expected: first.cutoff, found: p.cutoff });
        }
        out = FockDensity {
            cutoff: out.cutoff,
            modes: out.modes + p.modes,
            matrix: kron(&out.matrix, &p.matrix),
            truncation_mass: 1.0 - (1.0 - out.truncation_mass) * (1.0 - p.truncation_mass),
            pure: out.pure && p.pure,
            log_weights: out
                .log_weights
                .iter()
                .flat_map(|a| p.log_weights.iter().map(move |b| a + b))
                .collect(),
            vectors: kron(&out.vectors, &p.vectors),
        };
    }
    Ok(out)
}

/// Density of a state with no correlations between modes, as the tensor
/// product of its single-mode marginals.
pub fn fock_density_product(state: &GaussianState, d: usize, tol: f64) -> Result<FockDensity> {
    let n = state.n_modes();
    let sigma = state.sigma();
    for i in 0..2 * n {
        for j in 0..2 * n {
            if i % n != j % n && sigma[(i, j)].abs() > 1e-12 {
                return Err(Error::Precondition("the Fock oracle only handles product states".into()));
            }
        }
    }
    let parts = (0..n)
        .map(|k| fock_density(&crate::state::reduce(state, &[k])?, d, tol))
        .collect::<Result<Vec<_>>>()?;
    tensor(&parts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleMetrics {
    pub trace_distance: f64,
    pub fidelity: f64,
    pub fidelity_kind: FidelityKind,
    /// D(ρ‖σ); +∞ when ρ has weight outside the support of σ.
    pub relative_entropy: f64,
    pub entropy: f64,
}

/// Smallest weight outside supp σ that makes D(ρ‖σ) infinite.
const SUPPORT_TOL: f64 = 1e-12;

pub fn metrics(rho: &FockDensity, sigma: &FockDensity) -> Result<OracleMetrics> {
    if rho.matrix.nrows() != sigma.matrix.nrows() {
        return Err(Error::DimensionMismatch { expected: rho.matrix.nrows(), found: sigma.matrix.nrows() });
    }
    let diff = hermitian_part(&(&rho.matrix - &sigma.matrix));
    let trace_distance = 0.5 * diff.symmetric_eigen().eigenvalues.iter().map(|v| v.abs()).sum::<f64>();
    let (fidelity, fidelity_kind) = if rho.pure || sigma.pure {
        ((&rho.matrix * &sigma.matrix).trace().re.clamp(0.0, 1.0), FidelityKind::Overlap)
    } else {
        // √ρσ√ρ shares its nonzero spectrum with the small matrix
        // D^{1/2}V†σVD^{1/2} over the significant components of ρ.
        let keep = significant(&rho.log_weights);
        let cols: Vec<_> = keep
            .iter()
            .map(|&k| rho.vectors.column(k) * Complex64::new((0.5 * rho.log_weights[k]).exp(), 0.0))
            .collect();
        let half = CMat::from_columns(&cols);
        let inner = hermitian_part(&(half.adjoint() * &sigma.matrix * &half));
        let tr: f64 = inner.symmetric_eigen().eigenvalues.iter().map(|v| v.max(0.0).sqrt()).sum();
        ((tr * tr).min(1.0), FidelityKind::Uhlmann)
    };
    let entropy = rho.entropy();
    let mut cross = 0.0;
    let mut infinite = false;
    for (k, &lw) in sigma.log_weights.iter().enumerate() {
        let f = sigma.vectors.column(k);
        let weight = (f.adjoint() * &rho.matrix * f)[(0, 0)].re;
        if lw.is_finite() {
            cross += weight * lw;
        } else if weight > SUPPORT_TOL {
            infinite = true;
        }
    }
    let relative_entropy = if infinite { f64::INFINITY } else { (-entropy - cross).max(0.0) };
    Ok(OracleMetrics {
        trace_distance,
        fidelity,
        fidelity_kind,
        relative_entropy,
        entropy,
    })
}

/// Metrics of two single-mode (or product) states at cutoff d.
pub fn oracle_metrics(rho: &GaussianState, sigma: &GaussianState, d: usize, tol: f64) -> Result<OracleMetrics> {
    metrics(&fock_density_product(rho, d, tol)?, &fock_density_product(sigma, d, tol)?)
}

/// Real symmetric moments Tr(ρ x̂²), Tr(ρ p̂²), Tr(ρ (x̂p̂+p̂x̂)/2) minus the
/// squared means, i.e. the covariance the density reproduces (single mode).
pub fn covariance_from_density(rho: &FockDensity) -> Result<(Mat, [f64; 2])> {
    if rho.modes != 1 {
        return Err(Error::Precondition("covariance_from_density is single-mode".into()));
    }
    let d = rho.cutoff;
    let (x, p) = quadrature_operators(d + 1);
    let x2 = (&x * &x).view((0, 0), (d, d)).into_owned();
    let p2 = (&p * &p).view((0, 0), (d, d)).into_owned();
    let xp = ((&x * &p + &p * &x) * Complex64::new(0.5, 0.0)).view((0, 0), (d, d)).into_owned();
    let xm = rho.expectation(&x.view((0, 0), (d, d)).into_owned()).re;
    let pm = rho.expectation(&p.view((0, 0), (d, d)).into_owned()).re;
    let cxx = rho.expectation(&x2).re - xm * xm;
    let cpp = rho.expectation(&p2).re - pm * pm;
    let cxp = rho.expectation(&xp).re - xm * pm;
    Ok((Mat::from_row_slice(2, 2, &[cxx, cxp, cxp, cpp]), [xm, pm]))
}
