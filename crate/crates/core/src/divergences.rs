//! Classical and quantum distances between Gaussians.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};
use crate::state::{
    apply_symplectic, fidelity, fidelity_pure, hamiltonian_matrix, vacuum_probability, GaussianState,
};
use crate::symplectic::{symplectic_inverse, williamson, CovarianceMatrix};

/// A classical Gaussian N(mean, covariance) with no quantum validity constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianDistribution {
    mean: Vector,
    covariance: Mat,
}

impl GaussianDistribution {
    pub fn new(mean: Vector, covariance: Mat) -> Result<Self> {
        if !linalg::is_square(&covariance) || covariance.nrows() != mean.len() {
            return Err(Error::DimensionMismatch {
                expected: mean.len(),
                found: covariance.nrows(),
            });
        }
        let dev = linalg::max_asymmetry(&covariance);
        if dev > 1e-10 * covariance.amax().max(1.0) {
            return Err(Error::Asymmetric { max_deviation: dev });
        }
        let covariance = linalg::symmetrize(&covariance);
        linalg::cholesky(&covariance)?;
        Ok(Self { mean, covariance })
    }

    /// The Wigner distribution of a state.
    pub fn wigner(state: &GaussianState) -> Self {
        Self {
            mean: state.mean().clone(),
            covariance: state.sigma().clone(),
        }
    }

    /// Outcome law N(μ, Σ+V) of a general-dyne measurement with seed V.
    pub fn general_dyne(state: &GaussianState, seed: &Mat) -> Result<Self> {
        Self::new(state.mean().clone(), state.sigma() + seed)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &Vector {
        &self.mean
    }

    pub fn covariance(&self) -> &Mat {
        &self.covariance
    }
}

fn check_dims(p: &GaussianDistribution, q: &GaussianDistribution) -> Result<()> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    Ok(())
}

/// KL(p‖q) = ½(Tr(Σ_q^{−1}Σ_p − I) − log det(Σ_q^{−1}Σ_p) + δμᵀΣ_q^{−1}δμ).
pub fn gaussian_kl(p: &GaussianDistribution, q: &GaussianDistribution) -> Result<f64> {
    check_dims(p, q)?;
    let q_inv = linalg::inverse_pd(&q.covariance)?;
    let dm = &q.mean - &p.mean;
    let tr = (&q_inv * &p.covariance).trace() - p.dim() as f64;
    let log_det = linalg::log_det_pd(&p.covariance)? - linalg::log_det_pd(&q.covariance)?;
    let quad = dm.dot(&(&q_inv * &dm));
    Ok(0.5 * (tr - log_det + quad))
}

/// χ²(p‖q) = det Σ_q / √(det Σ_p·det(2Σ_q−Σ_p))·exp(δμᵀ(2Σ_q−Σ_p)^{−1}δμ) − 1.
pub fn gaussian_chi2(p: &GaussianDistribution, q: &GaussianDistribution) -> Result<f64> {
    check_dims(p, q)?;
    let m = &q.covariance * 2.0 - &p.covariance;
    let m_chol = linalg::cholesky(&m).map_err(|_| Error::Chi2Undefined)?;
    let log_det_m = 2.0 * m_chol.l().diagonal().iter().map(|x| x.ln()).sum::<f64>();
    let dm = &q.mean - &p.mean;
    let quad = dm.dot(&m_chol.solve(&dm));
    let log_ratio = linalg::log_det_pd(&q.covariance)?
        - 0.5 * (linalg::log_det_pd(&p.covariance)? + log_det_m)
        + quad;
    Ok(log_ratio.exp_m1())
}

/// Δ with q as the base:
/// max{‖Σ_q^{−1/2}Σ_pΣ_q^{−1/2} − I‖_F, ‖Σ_q^{−1/2}(μ_q − μ_p)‖}.
pub fn mahalanobis_delta(p: &GaussianDistribution, q: &GaussianDistribution) -> Result<f64> {
    check_dims(p, q)?;
    let w = linalg::inv_sqrtm_pd(&q.covariance)?;
    let cov_term = (&w * &p.covariance * &w - Mat::identity(p.dim(), p.dim())).norm();
    let mean_term = (&w * (&q.mean - &p.mean)).norm();
    Ok(cov_term.max(mean_term))
}

/// max of Δ over both base choices.
pub fn mahalanobis_delta_symmetrized(p: &GaussianDistribution, q: &GaussianDistribution) -> Result<f64> {
    Ok(mahalanobis_delta(p, q)?.max(mahalanobis_delta(q, p)?))
}

/// Whether the TV ≤ 1/600 condition behind the Δ bracket holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Proviso {
    NotApplicable,
    Unknown,
    Met,
    NotMet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceBracket {
    pub lower: f64,
    pub upper: f64,
    pub lower_method: &'static str,
    pub upper_method: &'static str,
    pub proviso: Proviso,
}

impl DistanceBracket {
    pub fn contains(&self, x: f64, slack: f64) -> bool {
        x >= self.lower - slack && x <= self.upper + slack
    }
}

pub const TV_BRACKET_PROVISO: f64 = 1.0 / 600.0;

/// [Δ/200, Δ/√2] with q as the base; only meaningful when TV ≤ 1/600, which
/// is left for the caller to settle (see `resolve_tv_proviso`).
pub fn tv_bracket(p: &GaussianDistribution, q: &GaussianDistribution) -> Result<DistanceBracket> {
    let delta = mahalanobis_delta(p, q)?;
    Ok(DistanceBracket {
        lower: delta / 200.0,
        upper: (delta / std::f64::consts::SQRT_2).min(1.0),
        lower_method: "mahalanobis/200",
        upper_method: "mahalanobis/sqrt2",
        proviso: Proviso::Unknown,
    })
}

/// Settles the bracket's proviso from a Monte-Carlo TV estimate.
pub fn resolve_tv_proviso(bracket: &mut DistanceBracket, tv: &MonteCarloEstimate) {
    bracket.proviso = if tv.estimate + 3.0 * tv.std_error <= TV_BRACKET_PROVISO {
        Proviso::Met
    } else if tv.estimate - 3.0 * tv.std_error > TV_BRACKET_PROVISO {
        Proviso::NotMet
    } else {
        Proviso::Unknown
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// Precomputed whitening maps for sampling from the equal mixture of p and q.
/// A draw x = μ_p + L_p z has log p(x) = −½|z|² − ½log det Σ_p + const and the
/// q-whitened coordinate L_q^{−1}(x − μ_q) = L_q^{−1}δμ + (L_q^{−1}L_p) z.
struct MixturePlan {
    d: usize,
    cross_pq: Mat,
    shift_pq: Vector,
    cross_qp: Mat,
    shift_qp: Vector,
    half_log_det_p: f64,
    half_log_det_q: f64,
}

impl MixturePlan {
    fn new(p: &GaussianDistribution, q: &GaussianDistribution) -> Result<Self> {
        check_dims(p, q)?;
        let lp = linalg::cholesky(&p.covariance)?.l();
        let lq = linalg::cholesky(&q.covariance)?.l();
        let solve = |l: &Mat, rhs: &Mat| -> Result<Mat> {
            l.solve_lower_triangular(rhs)
                .ok_or(Error::SingularCovariance { condition: f64::INFINITY })
        };
        let dm_pq = Mat::from_column_slice(p.dim(), 1, (&p.mean - &q.mean).as_slice());
        let dm_qp = -&dm_pq;
        Ok(Self {
            d: p.dim(),
            cross_pq: solve(&lq, &lp)?,
            shift_pq: solve(&lq, &dm_pq)?.column(0).into_owned(),
            cross_qp: solve(&lp, &lq)?,
            shift_qp: solve(&lp, &dm_qp)?.column(0).into_owned(),
            half_log_det_p: lp.diagonal().iter().map(|x| x.ln()).sum(),
            half_log_det_q: lq.diagonal().iter().map(|x| x.ln()).sum(),
        })
    }

    /// One draw of |p−q|/(p+q) at x ∼ (p+q)/2.
    fn weight<R: Rng + ?Sized>(&self, rng: &mut R, z: &mut Vector, other: &mut Vector) -> f64 {
        for v in z.iter_mut() {
            *v = StandardNormal.sample(rng);
        }
        let from_p = rng.random::<bool>();
        let (cross, shift, own_half, other_half) = if from_p {
            (&self.cross_pq, &self.shift_pq, self.half_log_det_p, self.half_log_det_q)
        } else {
            (&self.cross_qp, &self.shift_qp, self.half_log_det_q, self.half_log_det_p)
        };
        other.copy_from(shift);
        other.gemv(1.0, cross, z, 1.0);
        let own = -0.5 * z.norm_squared() - own_half;
        let alt = -0.5 * other.norm_squared() - other_half;
        (0.5 * (own - alt)).tanh().abs()
    }
}

struct Moments {
    count: u64,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn finish(&self) -> MonteCarloEstimate {
        let m = self.count as f64;
        let mean = self.sum / m;
        let var = ((self.sum_sq - m * mean * mean) / (m - 1.0)).max(0.0);
        MonteCarloEstimate {
            estimate: mean.clamp(0.0, 1.0),
            std_error: (var / m).sqrt(),
        }
    }
}

fn run_plan<R: Rng + ?Sized>(plan: &MixturePlan, m: u64, rng: &mut R) -> Moments {
    let mut z = Vector::zeros(plan.d);
    let mut other = Vector::zeros(plan.d);
    let mut acc = Moments {
        count: m,
        sum: 0.0,
        sum_sq: 0.0,
    };
    for _ in 0..m {
        let w = plan.weight(rng, &mut z, &mut other);
        acc.sum += w;
        acc.sum_sq += w * w;
    }
    acc
}

pub const MIN_MC_SAMPLES: u64 = 1000;

/// TV(p, q) = E_{x∼(p+q)/2}[|p−q|/(p+q)], estimated from m draws.
pub fn tv_monte_carlo<R: Rng + ?Sized>(
    p: &GaussianDistribution,
    q: &GaussianDistribution,
    m: u64,
    rng: &mut R,
) -> Result<MonteCarloEstimate> {
    if m < MIN_MC_SAMPLES {
        return Err(Error::Precondition(format!(
            "Monte-Carlo TV needs at least {MIN_MC_SAMPLES} samples, got {m}"
        )));
    }
    let plan = MixturePlan::new(p, q)?;
    Ok(run_plan(&plan, m, rng).finish())
}

/// Sharded variant: shard k draws from ChaCha20(seed) on stream k. The result
/// depends only on (seed, shards, m), not on how many threads run the shards.
pub fn tv_monte_carlo_sharded(
    p: &GaussianDistribution,
    q: &GaussianDistribution,
    m: u64,
    seed: u64,
    shards: u64,
) -> Result<MonteCarloEstimate> {
    if m < MIN_MC_SAMPLES {
        return Err(Error::Precondition(format!(
            "Monte-Carlo TV needs at least {MIN_MC_SAMPLES} samples, got {m}"
        )));
    }
    let shards = shards.clamp(1, m);
    let plan = MixturePlan::new(p, q)?;
    let parts: Vec<Moments> = (0..shards)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(k);
            let count = m / shards + u64::from(k < m % shards);
            run_plan(&plan, count, &mut rng)
        })
        .collect();
    let total = parts.iter().fold(
        Moments {
            count: 0,
            sum: 0.0,
            sum_sq: 0.0,
        },
        |a, b| Moments {
            count: a.count + b.count,
            sum: a.sum + b.sum,
            sum_sq: a.sum_sq + b.sum_sq,
        },
    );
    Ok(total.finish())
}

/// √(1 − F) for two pure states.
pub fn trace_distance_pure(rho: &GaussianState, sigma: &GaussianState) -> Result<f64> {
    if !rho.is_pure() || !sigma.is_pure() {
        return Err(Error::Precondition("trace_distance_pure needs two pure states".into()));
    }
    Ok((1.0 - fidelity_pure(rho, sigma)?).max(0.0).sqrt())
}

/// (1/(2√2))‖Σ₁^{−1/2}δμ‖ + ((1+√3)/8)·Tr((Σ₁^{−1}+Σ₂^{−1})|Σ₁−Σ₂|).
pub fn trace_distance_perturbation_bound(rho: &GaussianState, sigma: &GaussianState) -> Result<f64> {
    if rho.n_modes() != sigma.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: rho.n_modes(),
            found: sigma.n_modes(),
        });
    }
    let w = linalg::inv_sqrtm_pd(rho.sigma())?;
    let mean_term = (&w * (rho.mean() - sigma.mean())).norm() / (2.0 * std::f64::consts::SQRT_2);
    let inv_sum = linalg::inverse_pd(rho.sigma())? + linalg::inverse_pd(sigma.sigma())?;
    let abs = linalg::abs_sym(&(rho.sigma() - sigma.sigma()));
    let cov_term = (1.0 + 3f64.sqrt()) / 8.0 * (inv_sum * abs).trace();
    Ok(mean_term + cov_term)
}

/// The perturbation bound minimised over the lab frame and the Williamson
/// frames of both states. Trace distance is invariant under a common Gaussian
/// unitary, so each frame gives a valid bound; whitening removes the ~κ·η
/// blow-up a small rotation of a squeezed state causes in the lab frame.
pub fn trace_distance_perturbation_bound_whitened(rho: &GaussianState, sigma: &GaussianState) -> Result<(f64, bool)> {
    let lab = trace_distance_perturbation_bound(rho, sigma)?.min(trace_distance_perturbation_bound(sigma, rho)?);
    let mut best = (lab, false);
    for s in [williamson(rho.covariance())?.s, williamson(sigma.covariance())?.s] {
        let s_inv = symplectic_inverse(&s);
        let (r, q) = (apply_symplectic(rho, &s_inv)?, apply_symplectic(sigma, &s_inv)?);
        let b = trace_distance_perturbation_bound(&r, &q)?.min(trace_distance_perturbation_bound(&q, &r)?);
        if b < best.0 {
            best = (b, true);
        }
    }
    Ok(best)
}

/// Bracket on the trace distance of two Gaussian states.
///
/// Upper: the smaller of the perturbation bound (both argument orders, lab
/// and whitened frames) and √(1 − F), capped at 1; the exact value for two
/// pure states. Lower: the vacuum-test gap, a projective test onto one state
/// when it is pure, else 1 − √F, and, when `budget` ≥ 1000, Monte-Carlo TV of
/// general-dyne outcome laws with seeds {Σ₁, Σ₂, ½I} reported at
/// estimate − 3σ.
pub fn trace_distance_bounds<R: Rng + ?Sized>(
    rho: &GaussianState,
    sigma: &GaussianState,
    budget: u64,
    rng: &mut R,
) -> Result<DistanceBracket> {
    let (mut upper, mut upper_method) = (1.0, "trivial");
    let (pert, whitened) = trace_distance_perturbation_bound_whitened(rho, sigma)?;
    if pert < upper {
        upper = pert;
        upper_method = if whitened { "perturbation-whitened" } else { "perturbation" };
    }
    let (mut lower, mut lower_method) = (0.0, "trivial");
    let gap = (vacuum_probability(rho) - vacuum_probability(sigma)).abs();
    if gap > lower {
        lower = gap;
        lower_method = "vacuum-test";
    }
    let f = fidelity(rho, sigma)?;
    if rho.is_pure() && sigma.is_pure() {
        let exact = (1.0 - f).max(0.0).sqrt();
        return Ok(DistanceBracket {
            lower: exact,
            upper: exact,
            lower_method: "pure-exact",
            upper_method: "pure-exact",
            proviso: Proviso::NotApplicable,
        });
    }
    if rho.is_pure() || sigma.is_pure() {
        // Projective test onto the pure state.
        if 1.0 - f > lower {
            lower = 1.0 - f;
            lower_method = "pure-projector";
        }
    } else {
        // 1 − √F ≤ D_tr for the root fidelity.
        let fl = 1.0 - f.sqrt();
        if fl > lower {
            lower = fl;
            lower_method = "fidelity";
        }
    }
    let fvdg = (1.0 - f).max(0.0).sqrt();
    if fvdg < upper {
        upper = fvdg;
        upper_method = "fidelity";
    }
    if budget >= MIN_MC_SAMPLES {
        let half = Mat::identity(rho.sigma().nrows(), rho.sigma().nrows()) * 0.5;
        for seed in [rho.sigma(), sigma.sigma(), &half] {
            let p = GaussianDistribution::general_dyne(rho, seed)?;
            let q = GaussianDistribution::general_dyne(sigma, seed)?;
            let tv = tv_monte_carlo(&p, &q, budget, rng)?;
            let lb = tv.estimate - 3.0 * tv.std_error;
            if lb > lower {
                lower = lb;
                lower_method = "general-dyne-mc";
            }
        }
    }
    Ok(DistanceBracket {
        lower: lower.min(upper).max(0.0),
        upper,
        lower_method,
        upper_method,
        proviso: Proviso::NotApplicable,
    })
}

/// Multiplicative constants relating Wigner TV and trace distance:
/// c_lower·TV ≤ D_tr ≤ c_upper·TV, under the stated provisos.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerTraceConstants {
    pub c_lower: f64,
    pub c_upper: f64,
    pub trace_proviso: f64,
    pub tv_proviso: f64,
}

pub fn wigner_tv_trace_bracket(n: usize, pure: bool) -> Result<WignerTraceConstants> {
    if n == 0 {
        return Err(Error::Domain("mode count must be at least 1".into()));
    }
    let c_upper = if pure {
        150.0
    } else {
        100.0 * (std::f64::consts::FRAC_1_SQRT_2 + (1.0 + 3f64.sqrt()) / 4.0 * (2.0 * n as f64).sqrt())
    };
    Ok(WignerTraceConstants {
        c_lower: 2f64.sqrt() / 400.0,
        c_upper,
        trace_proviso: 2f64.sqrt() / 240_000.0,
        tv_proviso: TV_BRACKET_PROVISO,
    })
}

fn require_zero_mean(st: &GaussianState) -> Result<()> {
    if st.mean().amax() > 1e-12 {
        return Err(Error::Precondition("relative entropy formula needs zero-mean states".into()));
    }
    Ok(())
}

/// D(ρ‖σ) + D(σ‖ρ) = Tr[(Σ₁−Σ₂)(H₂−H₁)] for zero-mean non-degenerate states.
pub fn symmetrized_relative_entropy(rho: &GaussianState, sigma: &GaussianState) -> Result<f64> {
    require_zero_mean(rho)?;
    require_zero_mean(sigma)?;
    pair_term(rho.covariance(), sigma.covariance())
}

fn pair_term(a: &CovarianceMatrix, b: &CovarianceMatrix) -> Result<f64> {
    let ha = hamiltonian_matrix(a)?.entries;
    let hb = hamiltonian_matrix(b)?.entries;
    Ok(((a.matrix() - b.matrix()) * (hb - ha)).trace())
}

/// N·Σ_{a,a'} p_a p_{a'} Tr[(Σ_a−Σ_{a'})(H_{a'}−H_a)].
pub fn holevo_upper_bound(ensemble: &[(f64, GaussianState)], copies: u64) -> Result<f64> {
    for (_, st) in ensemble {
        require_zero_mean(st)?;
    }
    let hs: Vec<Mat> = ensemble
        .iter()
        .map(|(_, st)| hamiltonian_matrix(st.covariance()).map(|h| h.entries))
        .collect::<Result<_>>()?;
    let mut total = 0.0;
    for (i, (pa, a)) in ensemble.iter().enumerate() {
        for (j, (pb, b)) in ensemble.iter().enumerate() {
            if i != j {
                total += pa * pb * ((a.sigma() - b.sigma()) * (&hs[j] - &hs[i])).trace();
            }
        }
    }
    Ok(copies as f64 * total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ContinuousCDF, Normal};

    fn dist(mu: &[f64], cov: &[f64]) -> GaussianDistribution {
        let d = mu.len();
        GaussianDistribution::new(Vector::from_row_slice(mu), Mat::from_row_slice(d, d, cov)).unwrap()
    }

    #[test]
    fn kl_of_identical_is_zero() {
        let p = dist(&[0.1, 0.2], &[1.0, 0.3, 0.3, 2.0]);
        assert!(gaussian_kl(&p, &p).unwrap().abs() < 1e-14);
        assert!(gaussian_chi2(&p, &p).unwrap().abs() < 1e-14);
    }

    #[test]
    fn kl_one_dimensional_closed_form() {
        // KL(N(m1,s1²)‖N(m2,s2²)) = log(s2/s1) + (s1² + (m1−m2)²)/(2s2²) − ½
        let p = dist(&[0.3], &[0.5]);
        let q = dist(&[-0.2], &[2.0]);
        let expected = (2.0f64.sqrt() / 0.5f64.sqrt()).ln() + (0.5 + 0.25) / 4.0 - 0.5;
        assert_relative_eq!(gaussian_kl(&p, &q).unwrap(), expected, epsilon = 1e-14);
    }

    #[test]
    fn chi2_needs_feasible_pair() {
        let p = dist(&[0.0], &[3.0]);
        let q = dist(&[0.0], &[1.0]);
        assert_eq!(gaussian_chi2(&p, &q), Err(Error::Chi2Undefined));
        // 1-d: s2/√(s1(2s2−s1)) − 1
        let p = dist(&[0.0], &[1.0]);
        let q = dist(&[0.0], &[1.5]);
        assert_relative_eq!(gaussian_chi2(&p, &q).unwrap(), 1.5 / (2.0f64).sqrt() - 1.0, epsilon = 1e-14);
    }

    #[test]
    fn mahalanobis_examples() {
        let (n, eps) = (8usize, 0.5);
        let d = 2 * n;
        let p = GaussianDistribution::new(Vector::zeros(d), Mat::identity(d, d) * (0.5 * (1.0 + eps / n as f64))).unwrap();
        let q = GaussianDistribution::new(Vector::zeros(d), Mat::identity(d, d) * 0.5).unwrap();
        let delta = mahalanobis_delta(&p, &q).unwrap();
        assert_relative_eq!(delta, eps * (2.0 / n as f64).sqrt(), epsilon = 1e-14);
        let b = tv_bracket(&p, &q).unwrap();
        assert_relative_eq!(b.upper, eps / (n as f64).sqrt(), epsilon = 1e-14);
        assert_eq!(b.proviso, Proviso::Unknown);
        let z = tv_bracket(&q, &q).unwrap();
        assert!(z.lower.abs() < 1e-14 && z.upper.abs() < 1e-14);

        let cov = Mat::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let t = 0.7;
        let shift = linalg::sqrtm_psd(&cov) * Vector::from_row_slice(&[t, 0.0]);
        let p = GaussianDistribution::new(shift, cov.clone()).unwrap();
        let q = GaussianDistribution::new(Vector::zeros(2), cov).unwrap();
        assert_relative_eq!(mahalanobis_delta(&p, &q).unwrap(), t, epsilon = 1e-12);
    }

    #[test]
    fn tv_mc_unit_shift() {
        let p = dist(&[0.0], &[1.0]);
        let q = dist(&[1.0], &[1.0]);
        let exact = 2.0 * Normal::standard().cdf(0.5) - 1.0;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let est = tv_monte_carlo(&p, &q, 200_000, &mut rng).unwrap();
        assert!((est.estimate - exact).abs() < 3.0 * est.std_error, "{est:?} vs {exact}");
        let same = tv_monte_carlo(&p, &p, 1000, &mut rng).unwrap();
        assert!(same.estimate < 1e-15 && same.std_error < 1e-15);
        assert!(tv_monte_carlo(&p, &q, 999, &mut rng).is_err());
    }

    #[test]
    fn sharded_mc_is_independent_of_threads() {
        let p = dist(&[0.0, 0.0], &[1.0, 0.0, 0.0, 1.0]);
        let q = dist(&[0.3, 0.0], &[1.2, 0.1, 0.1, 0.9]);
        let a = tv_monte_carlo_sharded(&p, &q, 20_000, 7, 8).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| tv_monte_carlo_sharded(&p, &q, 20_000, 7, 8).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn bracket_of_identical_states_is_zero() {
        let st = GaussianState::thermal(1, 1.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = trace_distance_bounds(&st, &st, 2000, &mut rng).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
    }

    #[test]
    fn vacuum_vs_thermal_lower_bound() {
        let (n, eps) = (16usize, 0.5);
        let vac = GaussianState::vacuum(n);
        let th = GaussianState::thermal(n, 0.5 * (1.0 + eps / n as f64)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = trace_distance_bounds(&vac, &th, 0, &mut rng).unwrap();
        let gap = 1.0 - (1.0 + eps / (2.0 * n as f64)).powi(-(n as i32));
        assert!(b.lower >= gap - 1e-12);
        assert!(b.lower >= eps / 4.0 - 1e-12);
        assert!(b.lower <= b.upper);
    }

    #[test]
    fn wigner_constants() {
        let c = wigner_tv_trace_bracket(3, true).unwrap();
        assert_eq!(c.c_upper, 150.0);
        assert_relative_eq!(c.c_lower, 2f64.sqrt() / 400.0);
        let m = wigner_tv_trace_bracket(1, false).unwrap();
        assert_relative_eq!(
            m.c_upper,
            100.0 * (1.0 / 2f64.sqrt() + (1.0 + 3f64.sqrt()) / 4.0 * 2f64.sqrt()),
            epsilon = 1e-12
        );
        assert!(wigner_tv_trace_bracket(0, true).is_err());
    }

    #[test]
    fn relative_entropy_examples() {
        let a = GaussianState::thermal(1, 1.5).unwrap();
        let b = GaussianState::thermal(1, 1.0).unwrap();
        let f = |nu: f64| 0.5 * ((2.0 * nu + 1.0) / (2.0 * nu - 1.0)).ln();
        let expected = 2.0 * (1.5 - 1.0) * (f(1.0) - f(1.5));
        assert_relative_eq!(symmetrized_relative_entropy(&a, &b).unwrap(), expected, epsilon = 1e-12);
        assert_relative_eq!(expected, 0.5 * (3f64.ln() - 2f64.ln()), epsilon = 1e-14);
        assert!(symmetrized_relative_entropy(&a, &a).unwrap().abs() < 1e-14);
        assert!(symmetrized_relative_entropy(&GaussianState::vacuum(1), &a).is_err());

        let h = holevo_upper_bound(&[(0.5, a.clone()), (0.5, b.clone())], 10).unwrap();
        assert_relative_eq!(h, 10.0 * 0.5 * expected, epsilon = 1e-12);
        assert_eq!(holevo_upper_bound(&[(1.0, a)], 10).unwrap(), 0.0);
    }

    #[test]
    fn pure_distance_limits() {
        let vac = GaussianState::vacuum(1);
        assert_eq!(trace_distance_pure(&vac, &vac).unwrap(), 0.0);
        let far = GaussianState::from_matrices(Vector::from_row_slice(&[40.0, 0.0]), Mat::identity(2, 2) * 0.5).unwrap();
        assert_relative_eq!(trace_distance_pure(&vac, &far).unwrap(), 1.0, epsilon = 1e-12);
        assert!(trace_distance_pure(&vac, &GaussianState::thermal(1, 1.0).unwrap()).is_err());
    }
}
