use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::Rng;

use super::estimators::{heterodyne_estimate, project_to_physical};
use super::{check_unit, even_ceil, Calibration, Diagnostics, S1Branch, TomographyResult};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};
use crate::measurement::{GeneralDyneSeed, HomodyneSetting, StateOracle};
use crate::state::GaussianState;

/// κ̂ below this takes the heterodyne branch.
pub const KAPPA_BRANCH: f64 = 24.0;
/// Two mean-estimation angles closer than this (in |sin|) are unusable.
pub const MIN_SIN_GAP: f64 = 1e-6;

/// Budget of the non-adaptive single-mode protocol: K angles, 2T homodyne
/// shots per angle (squeezing c = E), N₀ heterodyne shots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgS1Params {
    pub k: usize,
    pub t: u64,
    pub n0: u64,
    pub e: f64,
    /// Use the evenly spaced angles iπ/K instead of random ones. Off by
    /// default; nothing is claimed about it.
    pub uniform_angles: bool,
}

impl AlgS1Params {
    pub fn new(k: usize, t: u64, n0: u64, e: f64) -> Result<Self> {
        if k == 0 || t == 0 || n0 == 0 {
            return Err(Error::Domain(format!("K, T, N0 must be ≥ 1 (got {k}, {t}, {n0})")));
        }
        if !(e > 2.0) || !e.is_finite() {
            return Err(Error::Domain(format!("E must exceed 2, got {e}")));
        }
        Ok(Self {
            k,
            t,
            n0,
            e,
            uniform_angles: false,
        })
    }

    pub fn calibrated(e: f64, eps: f64) -> Result<Self> {
        Self::calibrated_with(e, eps, &Calibration::FROZEN)
    }

    /// K = ⌈C₁E⌉, T = ⌈C₂·ln E/ε²⌉, N₀ = C₃/ε² rounded up to even.
    pub fn calibrated_with(e: f64, eps: f64, cal: &Calibration) -> Result<Self> {
        check_unit("eps", eps)?;
        if !(e > 2.0) {
            return Err(Error::Domain(format!("E must exceed 2, got {e}")));
        }
        let k = (cal.s1_angles * e).ceil() as usize;
        let t = (cal.s1_shots * e.ln() / (eps * eps)).ceil() as u64;
        Self::new(k, t, even_ceil(cal.s1_heterodyne / (eps * eps)), e)
    }

    /// N = 2KT + N₀.
    pub fn total_copies(&self) -> u64 {
        2 * self.k as u64 * self.t + self.n0
    }
}

/// |x|_π: distance from x to the nearest multiple of π.
pub fn wrapped_distance(x: f64) -> f64 {
    let r = x.rem_euclid(PI);
    r.min(PI - r)
}

/// μ̂_φ and Σ̂_φ from 2T homodyne outcomes: the mean of the first T, and the
/// half mean square of the differences z_j − z_{j+T} minus the seed variance 1/c.
pub fn homodyne_estimates(outcomes: &[f64], c: f64) -> Result<(f64, f64)> {
    if outcomes.len() < 2 || outcomes.len() % 2 != 0 {
        return Err(Error::Precondition(format!(
            "homodyne estimates need 2T ≥ 2 outcomes, got {}",
            outcomes.len()
        )));
    }
    let t = outcomes.len() / 2;
    let (first, second) = outcomes.split_at(t);
    let mean = first.iter().sum::<f64>() / t as f64;
    let sq: f64 = first.iter().zip(second).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((mean, sq / (2.0 * t as f64) - 1.0 / c))
}

/// One measured angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleEstimate {
    pub phi: f64,
    pub mean: f64,
    pub variance: f64,
}

/// (θ, Δ, b, a) of Σ_φ = b + Δ·sin²(θ − φ), a = b + Δ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSolution {
    pub theta: f64,
    pub delta: f64,
    pub b: f64,
    pub a: f64,
}

impl AngleSolution {
    /// R_θ·diag(b, a)·R_θᵀ.
    pub fn covariance(&self) -> Mat {
        let r = linalg::rotation(self.theta);
        linalg::symmetrize(&(&r * Mat::from_row_slice(2, 2, &[self.b, 0.0, 0.0, self.a]) * r.transpose()))
    }
}

/// Solves Σ_φ = b + Δ·sin²(θ − φ) from the variances at φ_min, φ₊ and φ₋
/// (each given as (φ, Σ_φ)).
///
/// With u± = φ± − φ_min and t = θ − φ_min, the identity
/// sin²(u − t) − sin²t = sin u·sin(u − 2t) turns the ratio condition into
/// tan 2t = (P sin u₊ − Q sin u₋)/(P cos u₊ − Q cos u₋), where
/// P = (Σ₋ − Σ_min)·sin u₊ and Q = (Σ₊ − Σ_min)·sin u₋. Of the two roots
/// t, t + π/2 the one giving Δ > 0 is kept.
pub fn solve_covariance_from_angles(min: (f64, f64), plus: (f64, f64), minus: (f64, f64)) -> Result<AngleSolution> {
    let (phi_m, s_m) = min;
    let (up, um) = (plus.0 - phi_m, minus.0 - phi_m);
    let (bp, bm) = (plus.1 - s_m, minus.1 - s_m);
    let p = bm * up.sin();
    let q = bp * um.sin();
    let num = p * up.sin() - q * um.sin();
    let den = p * up.cos() - q * um.cos();
    if num == 0.0 && den == 0.0 {
        return Err(Error::DegenerateGeometry { sin_gap: 0.0 });
    }
    let mut t = 0.5 * num.atan2(den);
    if t > FRAC_PI_4 {
        t -= FRAC_PI_2;
    } else if t <= -FRAC_PI_4 {
        t += FRAC_PI_2;
    }
    let gap = |t: f64| up.sin() * (up - 2.0 * t).sin();
    let alt = if t > 0.0 { t - FRAC_PI_2 } else { t + FRAC_PI_2 };
    if bp * gap(t) <= 0.0 && bp * gap(alt) > 0.0 {
        t = alt;
    }
    let g = gap(t);
    if g.abs() < 1e-15 {
        return Err(Error::DegenerateGeometry { sin_gap: g.abs() });
    }
    let delta = bp / g;
    let b = s_m - delta * t.sin().powi(2);
    Ok(AngleSolution {
        theta: (phi_m + t).rem_euclid(PI),
        delta,
        b,
        a: b + delta,
    })
}

/// The angles the squeezed branch picked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct S1Selection {
    pub phi_min: f64,
    pub phi_plus: f64,
    pub phi_minus: f64,
    pub theta_hat: f64,
    pub phi_1: f64,
    pub phi_2: f64,
    /// The raw solve, before the physical projection.
    pub solution: AngleSolution,
}

/// Index of the angle in the wrapped window [start, start + width]_π (going
/// in direction `sign` from `origin`) closest to the window centre.
fn pick_in_window(angles: &[AngleEstimate], origin: f64, sign: f64, lo: f64, hi: f64) -> Option<usize> {
    let centre = 0.5 * (lo + hi);
    angles
        .iter()
        .enumerate()
        .filter_map(|(i, a)| {
            let off = (sign * (a.phi - origin)).rem_euclid(PI);
            (off >= lo && off <= hi).then_some((i, (off - centre).abs()))
        })
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .map(|(i, _)| i)
}

fn nearest_angle(angles: &[AngleEstimate], target: f64) -> usize {
    angles
        .iter()
        .enumerate()
        .min_by(|x, y| wrapped_distance(x.1.phi - target).total_cmp(&wrapped_distance(y.1.phi - target)))
        .map(|(i, _)| i)
        .expect("at least one angle")
}

/// Non-adaptive single-mode learner. All settings (the K angles, then the
/// heterodyne block) are fixed from `params` and `rng` before any outcome is
/// read. Squeezed branch failures (`AbortNoAngle`, `DegenerateGeometry`) are
/// legitimate outcomes of the protocol and consume the full budget.
pub fn learn_single_mode_nonadaptive<R: Rng + ?Sized>(
    oracle: &mut StateOracle,
    params: &AlgS1Params,
    eps: f64,
    rng: &mut R,
) -> Result<TomographyResult> {
    if oracle.n_modes() != 1 {
        return Err(Error::Precondition("the non-adaptive protocol is single-mode".into()));
    }
    check_unit("eps", eps)?;
    let start = oracle.consumed();
    let k = params.k;
    let phis: Vec<f64> = if params.uniform_angles {
        (0..k).map(|i| i as f64 * PI / k as f64).collect()
    } else {
        (0..k).map(|_| rng.random::<f64>() * PI).collect()
    };

    let mut angles = Vec::with_capacity(k);
    for &phi in &phis {
        let setting = HomodyneSetting::new(phi, params.e)?;
        let z = oracle.sample_homodyne(&setting, 2 * params.t)?;
        let (mean, variance) = homodyne_estimates(&z, params.e)?;
        angles.push(AngleEstimate { phi, mean, variance });
    }
    let het = oracle.sample_general_dyne(&GeneralDyneSeed::heterodyne(1), params.n0)?;
    let mut diag = Diagnostics::default();
    diag.push("homodyne", 2 * k as u64 * params.t);
    diag.push("heterodyne", params.n0);

    let i_min = angles
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.variance.total_cmp(&y.1.variance))
        .map(|(i, _)| i)
        .expect("K ≥ 1");
    let s_min = angles[i_min].variance;
    let s_max = angles.iter().map(|a| a.variance).fold(f64::NEG_INFINITY, f64::max);
    let kappa = if s_min > 0.0 { s_max / s_min } else { f64::INFINITY };
    diag.kappa_hat = Some(kappa);

    if kappa < KAPPA_BRANCH {
        diag.branch = Some(S1Branch::Heterodyne);
        let used = &het[..het.len() - het.len() % 2];
        let (mu, sigma) = heterodyne_estimate(used)?;
        let estimate = GaussianState::new(mu, project_to_physical(&sigma)?)?;
        return Ok(TomographyResult {
            estimate,
            copies_used: oracle.consumed() - start,
            diagnostics: diag,
        });
    }
    diag.branch = Some(S1Branch::Squeezed);

    let w = kappa.powf(-0.5);
    let phi_min = angles[i_min].phi;
    let plus = pick_in_window(&angles, phi_min, 1.0, 3.0 * w, 4.0 * w).ok_or(Error::AbortNoAngle { side: "plus" })?;
    let minus = pick_in_window(&angles, phi_min, -1.0, 3.0 * w, 4.0 * w).ok_or(Error::AbortNoAngle { side: "minus" })?;
    let sol = solve_covariance_from_angles(
        (phi_min, s_min),
        (angles[plus].phi, angles[plus].variance),
        (angles[minus].phi, angles[minus].variance),
    )?;

    let i1 = nearest_angle(&angles, sol.theta);
    let i2 = nearest_angle(&angles, sol.theta + FRAC_PI_2);
    let (p1, p2) = (angles[i1].phi, angles[i2].phi);
    let sin_gap = (p2 - p1).sin();
    if sin_gap.abs() < MIN_SIN_GAP {
        return Err(Error::DegenerateGeometry { sin_gap: sin_gap.abs() });
    }
    let nu1 = angles[i1].mean;
    let nu2 = (angles[i2].mean - nu1 * (p2 - p1).cos()) / sin_gap;
    let mu = Vector::from_row_slice(&[nu1 * p1.cos() - nu2 * p1.sin(), nu1 * p1.sin() + nu2 * p1.cos()]);
    diag.selection = Some(S1Selection {
        phi_min,
        phi_plus: angles[plus].phi,
        phi_minus: angles[minus].phi,
        theta_hat: sol.theta,
        phi_1: p1,
        phi_2: p2,
        solution: sol,
    });
    let estimate = GaussianState::new(mu, project_to_physical(&sol.covariance())?)?;
    Ok(TomographyResult {
        estimate,
        copies_used: oracle.consumed() - start,
        diagnostics: diag,
    })
}
