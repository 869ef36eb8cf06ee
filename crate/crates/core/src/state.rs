//! Gaussian states and their closed-form functionals.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};
use crate::symplectic::{
    self, omega, symplectic_inverse, symplectic_residual, validate_covariance, williamson,
    CovarianceMatrix, Validity, ValidityClass, VALIDITY_TOL,
};

/// Symplectic eigenvalues within this distance of ½ are treated as degenerate
/// by the Hamiltonian-matrix functionals.
pub const DEGENERACY_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mu: Vector,
    sigma: CovarianceMatrix,
    validity: Validity,
}

impl GaussianState {
    pub fn new(mu: Vector, sigma: CovarianceMatrix) -> Result<Self> {
        if mu.len() != 2 * sigma.n() {
            return Err(Error::DimensionMismatch {
                expected: 2 * sigma.n(),
                found: mu.len(),
            });
        }
        if mu.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("mean has non-finite entries".into()));
        }
        let validity = validate_covariance(&sigma, VALIDITY_TOL)?;
        if validity.class == ValidityClass::Invalid {
            return Err(Error::InvalidCovariance {
                min_nu: validity.min_nu,
            });
        }
        Ok(Self { mu, sigma, validity })
    }

    pub fn from_matrices(mu: Vector, sigma: Mat) -> Result<Self> {
        Self::new(mu, CovarianceMatrix::new(sigma)?)
    }

    pub fn centered(sigma: Mat) -> Result<Self> {
        let d = sigma.nrows();
        Self::from_matrices(Vector::zeros(d), sigma)
    }

    pub fn vacuum(n: usize) -> Self {
        Self::centered(Mat::identity(2 * n, 2 * n) * 0.5).expect("vacuum is valid")
    }

    pub fn thermal(n: usize, nu: f64) -> Result<Self> {
        Self::centered(Mat::identity(2 * n, 2 * n) * nu)
    }

    /// Single-mode state with covariance R_θ·diag(b, a)·R_θᵀ: variance b along
    /// the direction (cos θ, sin θ) and a orthogonal to it.
    pub fn single_mode(mu: [f64; 2], b: f64, a: f64, theta: f64) -> Result<Self> {
        let r = linalg::rotation(theta);
        let d = Mat::from_row_slice(2, 2, &[b, 0.0, 0.0, a]);
        Self::from_matrices(Vector::from_row_slice(&mu), linalg::symmetrize(&(&r * d * r.transpose())))
    }

    pub fn n_modes(&self) -> usize {
        self.sigma.n()
    }

    pub fn mean(&self) -> &Vector {
        &self.mu
    }

    pub fn covariance(&self) -> &CovarianceMatrix {
        &self.sigma
    }

    pub fn sigma(&self) -> &Mat {
        self.sigma.matrix()
    }

    pub fn validity(&self) -> Validity {
        self.validity
    }

    pub fn is_pure(&self) -> bool {
        self.validity.is_pure()
    }
}

/// Wigner density N(μ, Σ) at `r`.
pub fn wigner_pdf(state: &GaussianState, r: &Vector) -> Result<f64> {
    let d = 2 * state.n_modes();
    if r.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: r.len(),
        });
    }
    let chol = linalg::cholesky(state.sigma()).map_err(|_| singular(state.sigma()))?;
    let diff = r - state.mean();
    let z = chol.l().solve_lower_triangular(&diff).ok_or_else(|| singular(state.sigma()))?;
    let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|x| x.ln()).sum::<f64>();
    Ok((-0.5 * z.norm_squared() - 0.5 * log_det - 0.5 * d as f64 * (2.0 * PI).ln()).exp())
}

fn singular(m: &Mat) -> Error {
    let (w, _) = linalg::sym_eigen(m);
    Error::SingularCovariance {
        condition: w[w.len() - 1] / w[0].abs().max(f64::MIN_POSITIVE),
    }
}

fn overlap_formula(a: &GaussianState, b: &GaussianState) -> Result<f64> {
    check_same_modes(a, b)?;
    let s = a.sigma() + b.sigma();
    let dm = a.mean() - b.mean();
    let inv = linalg::inverse_pd(&s)?;
    let log_det = linalg::log_det_pd(&s)?;
    let quad = (dm.transpose() * inv * &dm)[(0, 0)];
    Ok((-0.5 * log_det - 0.5 * quad).exp().clamp(0.0, 1.0))
}

fn check_same_modes(a: &GaussianState, b: &GaussianState) -> Result<()> {
    if a.n_modes() != b.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: a.n_modes(),
            found: b.n_modes(),
        });
    }
    Ok(())
}

/// Squared-convention fidelity Tr(ρσ), valid when at least one state is pure:
/// det(Σ₁+Σ₂)^{−1/2}·exp(−½δμᵀ(Σ₁+Σ₂)^{−1}δμ).
pub fn fidelity_pure(rho: &GaussianState, sigma: &GaussianState) -> Result<f64> {
    if !rho.is_pure() && !sigma.is_pure() {
        return Err(Error::Precondition(
            "fidelity_pure needs at least one pure state; use the Fock oracle for mixed pairs".into(),
        ));
    }
    overlap_formula(rho, sigma)
}

/// Squared Uhlmann fidelity (Tr√(√ρ σ √ρ))² of two Gaussian states, mixed or
/// pure. With V = Σ₁+Σ₂ and V_aux = Ωᵀ V⁻¹ (Ω/4 + Σ₂ΩΣ₁), whose product with
/// Ω has eigenvalues ±iλ_k,
/// F_tot⁴ = 2^{2n}·det V_aux·∏(1 + √(1 − 1/(4λ²)))/det V over all 2n
/// eigenvalues, and F = F_tot²·exp(−½δμᵀV⁻¹δμ).
pub fn fidelity(rho: &GaussianState, sigma: &GaussianState) -> Result<f64> {
    check_same_modes(rho, sigma)?;
    if rho.is_pure() || sigma.is_pure() {
        return overlap_formula(rho, sigma);
    }
    let n = rho.n_modes();
    let om = omega(n);
    let v = rho.sigma() + sigma.sigma();
    let v_inv = linalg::inverse_pd(&v)?;
    let aux = om.transpose() * &v_inv * (&om * 0.25 + sigma.sigma() * &om * rho.sigma());
    let mut log_num = 2.0 * n as f64 * 2f64.ln() + aux.determinant().abs().ln();
    for z in (&aux * &om).complex_eigenvalues().iter() {
        let l2 = z.norm_sqr();
        log_num += (1.0 + (1.0 - 0.25 / l2).max(0.0).sqrt()).ln();
    }
    let log_tot4 = log_num - linalg::log_det_pd(&v)?;
    let dm = rho.mean() - sigma.mean();
    let quad = (dm.transpose() * v_inv * &dm)[(0, 0)];
    Ok((0.5 * log_tot4 - 0.5 * quad).exp().clamp(0.0, 1.0))
}

/// ⟨0|ρ|0⟩.
pub fn vacuum_probability(rho: &GaussianState) -> f64 {
    overlap_formula(rho, &GaussianState::vacuum(rho.n_modes())).expect("Σ + ½I is positive definite")
}

/// f(ν) = ½·log((2ν+1)/(2ν−1)).
pub fn gibbs_exponent(nu: f64) -> f64 {
    0.5 * ((2.0 * nu + 1.0) / (2.0 * nu - 1.0)).ln()
}

/// Inverse of `gibbs_exponent`: ν = ½·coth(f).
pub fn gibbs_exponent_inverse(f: f64) -> f64 {
    if f > 20.0 {
        // coth f = 1 + 2e^{−2f} + O(e^{−4f})
        0.5 * (1.0 + 2.0 * (-2.0 * f).exp())
    } else {
        0.5 / f.tanh()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    pub entries: Mat,
}

/// H with ρ ∝ exp(−R̂ᵀHR̂). For Σ = S·diag(ν,ν)·Sᵀ, H = S^{−ᵀ}·f(D)·S^{−1}.
pub fn hamiltonian_matrix(sigma: &CovarianceMatrix) -> Result<HamiltonianMatrix> {
    let wd = williamson(sigma)?;
    let min_nu = *wd.nu.last().expect("n ≥ 1");
    if min_nu <= 0.5 + DEGENERACY_MARGIN {
        return Err(Error::Degenerate { min_nu });
    }
    let n = wd.nu.len();
    let f = Mat::from_fn(2 * n, 2 * n, |i, j| if i == j { gibbs_exponent(wd.nu[i % n]) } else { 0.0 });
    let s_inv = symplectic_inverse(&wd.s);
    let h = s_inv.transpose() * f * s_inv;
    Ok(HamiltonianMatrix {
        entries: linalg::symmetrize(&h),
    })
}

/// Rebuilds Σ from a Hamiltonian matrix by inverting f on its symplectic
/// spectrum.
pub fn covariance_from_hamiltonian(h: &HamiltonianMatrix) -> Result<CovarianceMatrix> {
    // H = T·f(D)·Tᵀ with T = S^{−ᵀ} symplectic, so Σ = T^{−ᵀ}·D·T^{−1}.
    let wd = williamson(&CovarianceMatrix::new(h.entries.clone())?)?;
    let n = wd.nu.len();
    let d = Mat::from_fn(2 * n, 2 * n, |i, j| {
        if i == j {
            gibbs_exponent_inverse(wd.nu[i % n])
        } else {
            0.0
        }
    });
    let t_inv = symplectic_inverse(&wd.s);
    CovarianceMatrix::new(linalg::symmetrize(&(t_inv.transpose() * d * t_inv)))
}

/// g(x) = (x+1)log(x+1) − x log x, with g(0) = 0.
pub fn entropy_g(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (x + 1.0) * (x + 1.0).ln() - x * x.ln()
    }
}

/// Σᵢ g(νᵢ − ½) in nats.
pub fn von_neumann_entropy(sigma: &CovarianceMatrix) -> Result<f64> {
    let nu = symplectic::symplectic_spectrum(sigma.matrix())?;
    Ok(nu.iter().map(|&v| entropy_g(v - 0.5)).sum())
}

/// Momentum sign flip diag(I, −I).
pub fn momentum_flip(n: usize) -> Mat {
    Mat::from_fn(2 * n, 2 * n, |i, j| {
        if i != j {
            0.0
        } else if i < n {
            1.0
        } else {
            -1.0
        }
    })
}

/// Embeds an n-mode symplectic matrix acting on modes `offset..offset+n` of
/// an m-mode system.
pub fn embed_symplectic(s: &Mat, offset: usize, m: usize) -> Mat {
    let n = s.nrows() / 2;
    let mut out = Mat::identity(2 * m, 2 * m);
    for i in 0..2 * n {
        for j in 0..2 * n {
            let gi = if i < n { offset + i } else { m + offset + i - n };
            let gj = if j < n { offset + j } else { m + offset + j - n };
            out[(gi, gj)] = s[(i, j)];
        }
    }
    out
}

/// Direct sum of two symplectic matrices on n₁ + n₂ modes.
pub fn symplectic_direct_sum(a: &Mat, b: &Mat) -> Mat {
    let (n1, n2) = (a.nrows() / 2, b.nrows() / 2);
    let m = n1 + n2;
    embed_symplectic(a, 0, m) * embed_symplectic(b, n1, m)
}

/// Pure 2n-mode state whose first n modes carry ρ and whose last n modes carry
/// the transposed state ZΣZ (Z flips momenta).
///
/// Each thermal mode ν is purified by a two-mode squeezed pair with
/// correlation c = √(ν²−¼) (+c between x's, −c between p's), and the pair is
/// then transported by S ⊕ ZSZ. A nonzero mean is placed on the first n modes.
pub fn purification_covariance(rho: &GaussianState) -> Result<GaussianState> {
    let n = rho.n_modes();
    let wd = williamson(rho.covariance())?;
    let m = 2 * n;
    let mut core = Mat::zeros(2 * m, 2 * m);
    for (i, &nu) in wd.nu.iter().enumerate() {
        let nu = nu.max(0.5);
        let c = (nu * nu - 0.25).max(0.0).sqrt();
        let (xa, xp, pa, pp) = (i, n + i, m + i, m + n + i);
        core[(xa, xa)] = nu;
        core[(xp, xp)] = nu;
        core[(pa, pa)] = nu;
        core[(pp, pp)] = nu;
        core[(xa, xp)] = c;
        core[(xp, xa)] = c;
        core[(pa, pp)] = -c;
        core[(pp, pa)] = -c;
    }
    let z = momentum_flip(n);
    let s_p = &z * &wd.s * &z;
    let total = symplectic_direct_sum(&wd.s, &s_p);
    let sigma = linalg::symmetrize(&(&total * core * total.transpose()));
    let mut mu = Vector::zeros(2 * m);
    for i in 0..n {
        mu[i] = rho.mean()[i];
        mu[m + i] = rho.mean()[n + i];
    }
    GaussianState::from_matrices(mu, sigma)
}

/// Global quadrature indices (x then p) for a list of modes.
pub fn quadrature_indices(n: usize, modes: &[usize]) -> Vec<usize> {
    modes.iter().copied().chain(modes.iter().map(|&k| n + k)).collect()
}

/// Marginal on the listed (0-based) modes, kept in the listed order.
pub fn reduce(state: &GaussianState, modes: &[usize]) -> Result<GaussianState> {
    let n = state.n_modes();
    if modes.is_empty() {
        return Err(Error::Domain("mode set is empty".into()));
    }
    let mut seen = vec![false; n];
    for &k in modes {
        if k >= n {
            return Err(Error::Domain(format!("mode {k} out of range for {n} modes")));
        }
        if seen[k] {
            return Err(Error::Domain(format!("mode {k} listed twice")));
        }
        seen[k] = true;
    }
    let idx = quadrature_indices(n, modes);
    let mu = Vector::from_iterator(idx.len(), idx.iter().map(|&i| state.mean()[i]));
    let sigma = state.sigma().select_rows(&idx).select_columns(&idx);
    GaussianState::from_matrices(mu, sigma)
}

/// μ → Sμ, Σ → SΣSᵀ.
pub fn apply_symplectic(state: &GaussianState, s: &Mat) -> Result<GaussianState> {
    let d = 2 * state.n_modes();
    if s.nrows() != d || s.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: s.nrows(),
        });
    }
    let residual = symplectic_residual(s);
    if residual > 1e-8 * s.amax().powi(2).max(1.0) {
        return Err(Error::NotSymplectic { residual });
    }
    GaussianState::from_matrices(s * state.mean(), linalg::symmetrize(&(s * state.sigma() * s.transpose())))
}

/// μ → μ + ξ.
pub fn apply_displacement(state: &GaussianState, xi: &Vector) -> Result<GaussianState> {
    if xi.len() != state.mean().len() {
        return Err(Error::DimensionMismatch {
            expected: state.mean().len(),
            found: xi.len(),
        });
    }
    GaussianState::new(state.mean() + xi, state.covariance().clone())
}

/// Tensor product of states (modes of `a` first).
pub fn tensor_product(a: &GaussianState, b: &GaussianState) -> Result<GaussianState> {
    let (n1, n2) = (a.n_modes(), b.n_modes());
    let m = n1 + n2;
    let mut mu = Vector::zeros(2 * m);
    let mut sigma = Mat::zeros(2 * m, 2 * m);
    let ia = quadrature_indices(m, &(0..n1).collect::<Vec<_>>());
    let ib = quadrature_indices(m, &(n1..m).collect::<Vec<_>>());
    for (idx, st) in [(&ia, a), (&ib, b)] {
        for (r, &gi) in idx.iter().enumerate() {
            mu[gi] = st.mean()[r];
            for (c, &gj) in idx.iter().enumerate() {
                sigma[(gi, gj)] = st.sigma()[(r, c)];
            }
        }
    }
    GaussianState::from_matrices(mu, sigma)
}

/// True when the state is zero-mean and Σ commutes with Ω, which is exactly
/// the condition for a passive (linear-optics rotated thermal) state.
pub fn is_passive(state: &GaussianState, tol: f64) -> bool {
    let w = omega(state.n_modes());
    let s = state.sigma();
    let comm = (&w * s - s * &w).amax();
    state.mean().amax() <= tol && comm <= tol * s.amax().max(1.0)
}
