//! Hard-instance families: column-orthogonal overlap families and the state
//! ensembles built on them, with analytic pairwise separation reports and a
//! check that Gaussian measurements can be simulated from Wigner samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::divergences::{gaussian_kl, symmetrized_relative_entropy, trace_distance_pure, GaussianDistribution};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};
use crate::measurement::{GaussianSampler, GeneralDyneSeed, StateOracle};
use crate::state::{fidelity, is_passive, GaussianState};
use crate::symplectic::{validate_covariance, ValidityClass, VALIDITY_TOL};

const ORTHONORMAL_TOL: f64 = 1e-10;

/// n×s matrices with orthonormal columns whose pairwise overlaps
/// ‖U_aᵀU_b‖_F² stay below n/18.
#[derive(Debug, Clone)]
pub struct OverlapFamily {
    n: usize,
    s: usize,
    members: Vec<Mat>,
    max_overlap: f64,
}

/// s = ⌈n/9⌉.
pub fn family_width(n: usize) -> usize {
    n.div_ceil(9)
}

/// n/18.
pub fn overlap_limit(n: usize) -> f64 {
    n as f64 / 18.0
}

fn overlap(a: &Mat, b: &Mat) -> f64 {
    (a.transpose() * b).norm_squared()
}

impl OverlapFamily {
    /// Wraps explicit members after checking shapes and orthonormality. The
    /// overlap limit is not enforced here; `max_overlap` records what it is.
    pub fn from_members(n: usize, members: Vec<Mat>) -> Result<Self> {
        let s = members.first().map_or(0, |m| m.ncols());
        if members.is_empty() || s == 0 || s > n {
            return Err(Error::Domain("an overlap family needs at least one n×s member with 1 ≤ s ≤ n".into()));
        }
        for u in &members {
            if u.nrows() != n || u.ncols() != s {
                return Err(Error::DimensionMismatch { expected: n, found: u.nrows() });
            }
            let dev = (u.transpose() * u - Mat::identity(s, s)).amax();
            if dev > ORTHONORMAL_TOL {
                return Err(Error::Precondition(format!("member columns are not orthonormal (deviation {dev:.2e})")));
            }
        }
        let mut max_overlap: f64 = 0.0;
        for i in 0..members.len() {
            for j in 0..i {
                max_overlap = max_overlap.max(overlap(&members[i], &members[j]));
            }
        }
        Ok(Self { n, s, members, max_overlap })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn members(&self) -> &[Mat] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Largest ‖U_aᵀU_b‖_F² over distinct pairs (0 for a single member).
    pub fn max_overlap(&self) -> f64 {
        self.max_overlap
    }

    pub fn overlap(&self, a: usize, b: usize) -> f64 {
        overlap(&self.members[a], &self.members[b])
    }
}

fn random_orthonormal<R: Rng + ?Sized>(n: usize, s: usize, rng: &mut R) -> Mat {
    let g = Mat::from_fn(n, s, |_, _| StandardNormal.sample(rng));
    g.qr().q()
}

/// Greedy rejection sampling: draw Haar-random n×s frames and keep each one
/// whose overlap with every kept member is ≤ n/18. `max_tries` bounds the
/// total number of draws.
pub fn sample_overlap_family<R: Rng + ?Sized>(n: usize, m: usize, max_tries: usize, rng: &mut R) -> Result<OverlapFamily> {
    if n < 10 {
        return Err(Error::Domain(format!("overlap families need n ≥ 10, got {n}")));
    }
    if m == 0 {
        return Err(Error::Domain("family size must be at least 1".into()));
    }
    let s = family_width(n);
    let limit = overlap_limit(n);
    let mut members: Vec<Mat> = Vec::with_capacity(m);
    let mut best_rejected = f64::INFINITY;
    let mut tries = 0;
    while members.len() < m {
        if tries == max_tries {
            return Err(Error::ConstructionFailed { tries, best_overlap: best_rejected });
        }
        tries += 1;
        let u = random_orthonormal(n, s, rng);
        let worst = members.iter().map(|v| overlap(&u, v)).fold(0.0, f64::max);
        if worst <= limit {
            members.push(u);
        } else {
            best_rejected = best_rejected.min(worst);
        }
    }
    OverlapFamily::from_members(n, members)
}

/// The hard families with their parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnsembleKind {
    /// Σ_a = ½I + (ε/2n)·(U_aU_aᵀ ⊕ U_aU_aᵀ); ε ≤ 5.
    PassiveC1 { eps: f64 },
    /// Σ′_a = ½(I − ε/(√n+ε)·U_aU_aᵀ) ⊕ ½(I + ε/√n·U_aU_aᵀ), pure; ε ≤ 1.
    PureC2 { eps: f64 },
    /// 2Σ′_a: the pure family doubled, every ν = 1; ε ≤ 1.
    PureScaledC2_1 { eps: f64 },
    /// Σ_a = ½λI ⊕ (1/2λ)(I + (ε/n)U_aU_aᵀ); ε ≤ 1, λ > 1.
    HeterodyneHardC3 { eps: f64, lambda: f64 },
    /// Two single-mode states ½R_φ diag(a, 1/a)R_φᵀ and
    /// ½R_φ diag(a, (1+2ε)/a)R_φᵀ; ε ≤ ⅓, a > 1.
    SqueezedPairE1 { eps: f64, a: f64, phi: f64 },
}

impl EnsembleKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::PassiveC1 { .. } => "passive-c1",
            Self::PureC2 { .. } => "pure-c2",
            Self::PureScaledC2_1 { .. } => "pure-scaled-c2.1",
            Self::HeterodyneHardC3 { .. } => "heterodyne-c3",
            Self::SqueezedPairE1 { .. } => "squeezed-pair-e1",
        }
    }

    pub fn eps(&self) -> f64 {
        match *self {
            Self::PassiveC1 { eps }
            | Self::PureC2 { eps }
            | Self::PureScaledC2_1 { eps }
            | Self::HeterodyneHardC3 { eps, .. }
            | Self::SqueezedPairE1 { eps, .. } => eps,
        }
    }

    /// Same family at a different ε.
    pub fn with_eps(self, eps: f64) -> Self {
        match self {
            Self::PassiveC1 { .. } => Self::PassiveC1 { eps },
            Self::PureC2 { .. } => Self::PureC2 { eps },
            Self::PureScaledC2_1 { .. } => Self::PureScaledC2_1 { eps },
            Self::HeterodyneHardC3 { lambda, .. } => Self::HeterodyneHardC3 { eps, lambda },
            Self::SqueezedPairE1 { a, phi, .. } => Self::SqueezedPairE1 { eps, a, phi },
        }
    }

    /// Largest ε the construction admits.
    pub fn max_eps(&self) -> f64 {
        match self {
            Self::PassiveC1 { .. } => 5.0,
            Self::SqueezedPairE1 { .. } => 1.0 / 3.0,
            _ => 1.0,
        }
    }

    pub fn needs_family(&self) -> bool {
        !matches!(self, Self::SqueezedPairE1 { .. })
    }

    fn check(&self) -> Result<()> {
        let eps = self.eps();
        if !(eps > 0.0 && eps <= self.max_eps()) {
            return Err(Error::Domain(format!(
                "{} needs ε in (0, {}], got {eps}",
                self.name(),
                self.max_eps()
            )));
        }
        match *self {
            Self::HeterodyneHardC3 { lambda, .. } if !(lambda > 1.0) => {
                Err(Error::Domain(format!("heterodyne-c3 needs λ > 1, got {lambda}")))
            }
            Self::SqueezedPairE1 { a, phi, .. } if !(a > 1.0) || !phi.is_finite() => {
                Err(Error::Domain(format!("squeezed-pair-e1 needs a > 1 and finite φ, got a = {a}, φ = {phi}")))
            }
            _ => Ok(()),
        }
    }
}

fn two_blocks(x: &Mat, p: &Mat) -> Mat {
    linalg::block_diag(&[x, p])
}

fn member_covariance(kind: &EnsembleKind, u: &Mat) -> Mat {
    let n = u.nrows() as f64;
    let id = Mat::identity(u.nrows(), u.nrows());
    let proj = u * u.transpose();
    match *kind {
        EnsembleKind::PassiveC1 { eps } => {
            let b = &id * 0.5 + &proj * (eps / (2.0 * n));
            two_blocks(&b, &b)
        }
        EnsembleKind::PureC2 { eps } | EnsembleKind::PureScaledC2_1 { eps } => {
            let scale = if matches!(kind, EnsembleKind::PureC2 { .. }) { 0.5 } else { 1.0 };
            let x = (&id - &proj * (eps / (n.sqrt() + eps))) * scale;
            let p = (&id + &proj * (eps / n.sqrt())) * scale;
            two_blocks(&x, &p)
        }
        EnsembleKind::HeterodyneHardC3 { eps, lambda } => {
            let x = &id * (0.5 * lambda);
            let p = (&id + &proj * (eps / n)) * (0.5 / lambda);
            two_blocks(&x, &p)
        }
        EnsembleKind::SqueezedPairE1 { .. } => unreachable!("single-mode pair has no family"),
    }
}

fn squeezed_pair(eps: f64, a: f64, phi: f64) -> Result<Vec<GaussianState>> {
    let r = linalg::rotation(phi);
    let make = |low: f64| {
        let d = Mat::from_row_slice(2, 2, &[0.5 * a, 0.0, 0.0, 0.5 * low / a]);
        GaussianState::centered(linalg::symmetrize(&(&r * d * r.transpose())))
    };
    Ok(vec![make(1.0)?, make(1.0 + 2.0 * eps)?])
}

/// Builds every member of the requested family and checks the class each
/// construction promises (pure, passive, or ‖Σ‖_op = λ/2).
pub fn build_ensemble(kind: EnsembleKind, family: Option<&OverlapFamily>) -> Result<Vec<GaussianState>> {
    kind.check()?;
    let states = match (kind, family) {
        (EnsembleKind::SqueezedPairE1 { eps, a, phi }, _) => squeezed_pair(eps, a, phi)?,
        (_, None) => {
            return Err(Error::Precondition(format!("{} needs an overlap family", kind.name())));
        }
        (_, Some(f)) => f
            .members()
            .iter()
            .map(|u| GaussianState::centered(member_covariance(&kind, u)))
            .collect::<Result<Vec<_>>>()?,
    };
    for st in &states {
        let v = validate_covariance(st.covariance(), VALIDITY_TOL)?;
        let ok = match kind {
            EnsembleKind::PureC2 { .. } => v.class == ValidityClass::PureValid,
            EnsembleKind::PassiveC1 { .. } => v.is_valid() && is_passive(st, 1e-9),
            EnsembleKind::HeterodyneHardC3 { lambda, .. } => {
                v.is_valid() && (linalg::op_norm_sym(st.sigma()) - 0.5 * lambda).abs() <= 1e-12 * lambda
            }
            _ => v.is_valid(),
        };
        if !ok {
            return Err(Error::Precondition(format!("{} member failed its class check ({:?})", kind.name(), v.class)));
        }
    }
    Ok(states)
}

/// 1 − Pr(vacuum on the last n−s modes) for ρ_b after rotating by V_a:
/// 1 − det(I + (ε/2n)·W_aᵀU_bU_bᵀW_a)^{−power}, with power 1 for the
/// passive family (both quadratures broadened) and ½ for the heterodyne
/// family (only p broadened, after unsqueezing).
fn vacuum_gap(ua: &Mat, ub: &Mat, eps: f64, power: f64) -> f64 {
    let n = ua.nrows();
    let w = linalg::orthonormal_complement(ua);
    let m = Mat::identity(n - ua.ncols(), n - ua.ncols()) + w.transpose() * ub * ub.transpose() * &w * (eps / (2.0 * n as f64));
    1.0 - m.determinant().powf(-power)
}

/// One pair (a, b) of a separation report.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSeparation {
    pub a: usize,
    pub b: usize,
    /// Analytic lower bound on D_tr(ρ_a, ρ_b).
    pub d_lower: f64,
    /// The divergence the family's proof uses for this pair.
    pub kl: f64,
    /// ‖U_aᵀU_b‖_F², or 0 for the single-mode pair.
    pub overlap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationReport {
    pub kind: EnsembleKind,
    /// What the `kl` column holds for this family.
    pub kl_label: &'static str,
    pub min_d_lower: f64,
    pub max_kl: f64,
    /// The separation the construction promises: ε/54, ε/(6√5), ε/90 or
    /// 1 − (1+ε)^{−1/2}; for the doubled pure family, ε/(6√5) scaled down by
    /// the Wigner-TV chain is too weak to be useful, so 0.
    pub promised: f64,
    pub pairs: Vec<PairSeparation>,
}

/// The promised per-pair separation of each family.
pub fn promised_separation(kind: &EnsembleKind) -> f64 {
    let eps = kind.eps();
    match kind {
        EnsembleKind::PassiveC1 { .. } => eps / 54.0,
        EnsembleKind::PureC2 { .. } => eps / (6.0 * 5f64.sqrt()),
        EnsembleKind::PureScaledC2_1 { .. } => 0.0,
        EnsembleKind::HeterodyneHardC3 { .. } => eps / 90.0,
        EnsembleKind::SqueezedPairE1 { .. } => 1.0 - (1.0 + eps).powf(-0.5),
    }
}

fn heterodyne_kl(a: &GaussianState, b: &GaussianState) -> Result<f64> {
    let half = Mat::identity(a.sigma().nrows(), a.sigma().nrows()) * 0.5;
    gaussian_kl(&GaussianDistribution::general_dyne(a, &half)?, &GaussianDistribution::general_dyne(b, &half)?)
}

fn pair_report(kind: &EnsembleKind, states: &[GaussianState], family: Option<&OverlapFamily>, a: usize, b: usize) -> Result<PairSeparation> {
    let (sa, sb) = (&states[a], &states[b]);
    let eps = kind.eps();
    let (d_lower, kl) = match *kind {
        EnsembleKind::PassiveC1 { .. } => {
            let f = family.expect("checked by build_ensemble");
            let (ua, ub) = (&f.members()[a], &f.members()[b]);
            let gap = vacuum_gap(ua, ub, eps, 1.0).max(vacuum_gap(ub, ua, eps, 1.0));
            (gap, gaussian_kl(&GaussianDistribution::wigner(sa), &GaussianDistribution::wigner(sb))?)
        }
        EnsembleKind::PureC2 { .. } => (trace_distance_pure(sa, sb)?, heterodyne_kl(sa, sb)?),
        EnsembleKind::PureScaledC2_1 { .. } => {
            (1.0 - fidelity(sa, sb)?.sqrt(), symmetrized_relative_entropy(sa, sb)?)
        }
        EnsembleKind::HeterodyneHardC3 { .. } => {
            let f = family.expect("checked by build_ensemble");
            let (ua, ub) = (&f.members()[a], &f.members()[b]);
            let gap = vacuum_gap(ua, ub, eps, 0.5).max(vacuum_gap(ub, ua, eps, 0.5));
            (gap, heterodyne_kl(sa, sb)?)
        }
        EnsembleKind::SqueezedPairE1 { .. } => {
            let det = (sa.sigma() + sb.sigma()).determinant();
            (1.0 - det.powf(-0.5), heterodyne_kl(sa, sb)?)
        }
    };
    Ok(PairSeparation {
        a,
        b,
        d_lower,
        kl,
        overlap: family.map_or(0.0, |f| f.overlap(a, b)),
    })
}

/// Pairwise analytic separations of a built ensemble. Pairs are evaluated in
/// parallel and reported in (a, b) order with a < b.
pub fn separation_report(kind: EnsembleKind, states: &[GaussianState], family: Option<&OverlapFamily>) -> Result<SeparationReport> {
    kind.check()?;
    if kind.needs_family() && family.map_or(true, |f| f.len() != states.len()) {
        return Err(Error::Precondition("the report needs the family the ensemble was built from".into()));
    }
    let index: Vec<(usize, usize)> = (0..states.len()).flat_map(|b| (0..b).map(move |a| (a, b))).collect();
    let mut pairs = index
        .par_iter()
        .map(|&(a, b)| pair_report(&kind, states, family, a, b))
        .collect::<Result<Vec<_>>>()?;
    pairs.sort_by_key(|p| (p.a, p.b));
    let kl_label = match kind {
        EnsembleKind::PassiveC1 { .. } => "wigner-kl",
        EnsembleKind::PureScaledC2_1 { .. } => "symmetrized-relative-entropy",
        _ => "heterodyne-kl",
    };
    Ok(SeparationReport {
        kind,
        kl_label,
        min_d_lower: pairs.iter().map(|p| p.d_lower).fold(f64::INFINITY, f64::min),
        max_kl: pairs.iter().map(|p| p.kl).fold(0.0, f64::max),
        promised: promised_separation(&kind),
        pairs,
    })
}

/// Two-sample Kolmogorov–Smirnov statistic and its asymptotic p-value.
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> (f64, f64) {
    let mut a = x.to_vec();
    let mut b = y.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    let ne = (a.len() * b.len()) as f64 / (a.len() + b.len()) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    (d, kolmogorov_q(lambda))
}

/// Q(λ) = 2Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-12 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone)]
pub struct SimulabilityDemo {
    /// General-dyne outcomes drawn through the state oracle.
    pub measured: Vec<Vector>,
    /// Wigner samples with independent N(0, V) noise added.
    pub simulated: Vec<Vector>,
    pub copies_measured: u64,
    pub copies_simulated: u64,
    /// KS statistic and p-value per coordinate.
    pub ks: Vec<(f64, f64)>,
    /// Every coordinate passes at level 0.01 (Bonferroni over coordinates).
    pub consistent: bool,
}

/// Draws m general-dyne outcomes with seed V from the oracle and m outcomes
/// simulated from Wigner samples: x ∼ N(μ, Σ), then x + N(0, V).
pub fn classical_simulability_demo(state: &GaussianState, seed: &GeneralDyneSeed, m: u64, rng: &mut ChaCha20Rng) -> Result<SimulabilityDemo> {
    if seed.n_modes() != state.n_modes() {
        return Err(Error::DimensionMismatch { expected: state.n_modes(), found: seed.n_modes() });
    }
    let mut oracle = StateOracle::from_rng(state.clone(), ChaCha20Rng::from_rng(&mut *rng));
    let measured = oracle.sample_general_dyne(seed, m)?;
    let wigner = GaussianSampler::new(state.mean().clone(), state.sigma());
    let noise = GaussianSampler::new(Vector::zeros(2 * state.n_modes()), seed.matrix());
    let simulated: Vec<Vector> = (0..m).map(|_| wigner.sample(rng) + noise.sample(rng)).collect();
    let d = 2 * state.n_modes();
    let ks: Vec<(f64, f64)> = (0..d)
        .map(|k| {
            let a: Vec<f64> = measured.iter().map(|v| v[k]).collect();
            let b: Vec<f64> = simulated.iter().map(|v| v[k]).collect();
            ks_two_sample(&a, &b)
        })
        .collect();
    let consistent = ks.iter().all(|&(_, p)| p >= 0.01 / d as f64);
    Ok(SimulabilityDemo {
        copies_measured: oracle.consumed(),
        copies_simulated: m,
        measured,
        simulated,
        ks,
        consistent,
    })
}
