//! Self-checks runnable from the command line: symplectic algebra, the Fock
//! oracle against closed forms, ensemble constructions, and divergence
//! identities. Each check reports a name, a verdict and a one-line detail.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::divergences::{gaussian_chi2, gaussian_kl, trace_distance_bounds, trace_distance_pure, tv_bracket, GaussianDistribution};
use crate::ensembles::{build_ensemble, sample_overlap_family, separation_report, EnsembleKind, OverlapFamily};
use crate::error::{Error, Result};
use crate::fock::{cutoff_for_energy, oracle_metrics};
use crate::linalg::{Mat, Vector};
use crate::state::{fidelity, fidelity_pure, vacuum_probability, GaussianState};
use crate::symplectic::{
    random_covariance, validate_covariance, williamson, CovarianceKind, CovarianceMatrix, ValidityClass,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Symplectic,
    Oracle,
    Ensembles,
    Identities,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symplectic" => Ok(Self::Symplectic),
            "oracle" => Ok(Self::Oracle),
            "ensembles" => Ok(Self::Ensembles),
            "identities" => Ok(Self::Identities),
            "all" => Ok(Self::All),
            other => Err(Error::Parse(format!(
                "unknown suite {other:?} (expected symplectic, oracle, ensembles, identities or all)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name, passed, detail }
}

fn from_result(name: &'static str, r: Result<(bool, String)>) -> CheckResult {
    match r {
        Ok((passed, detail)) => check(name, passed, detail),
        Err(e) => check(name, false, format!("error: {e}")),
    }
}

fn symplectic_checks(rng: &mut ChaCha20Rng) -> Vec<CheckResult> {
    let mut out = Vec::new();
    out.push(from_result("williamson-residuals", (|| {
        let (mut worst_s, mut worst_r) = (0f64, 0f64);
        for i in 0..60 {
            let n = 1 + i % 5;
            let kind = [CovarianceKind::Mixed, CovarianceKind::Pure, CovarianceKind::Passive][i % 3];
            let v = random_covariance(n, 20.0, kind, rng)?;
            let w = williamson(&v)?;
            worst_s = worst_s.max(w.residuals.symplectic);
            worst_r = worst_r.max(w.residuals.reconstruction);
        }
        Ok((worst_s <= 1e-9 && worst_r <= 1e-9, format!("max symplectic {worst_s:.2e}, reconstruction {worst_r:.2e}")))
    })()));
    out.push(from_result("validity-classes", (|| {
        let vac = validate_covariance(&CovarianceMatrix::vacuum(3), 1e-8)?.class;
        let thermal = validate_covariance(&CovarianceMatrix::new(Mat::identity(4, 4) * 0.8)?, 1e-8)?.class;
        let bad = validate_covariance(&CovarianceMatrix::new(Mat::identity(2, 2) * 0.45)?, 1e-8)?.class;
        let ok = vac == ValidityClass::PureValid && thermal == ValidityClass::MixedValid && bad == ValidityClass::Invalid;
        Ok((ok, format!("vacuum {vac:?}, thermal {thermal:?}, 0.45·I {bad:?}")))
    })()));
    out.push(from_result("thermal-spectrum", (|| {
        let nu = 0.5 + rng.random::<f64>() * 3.0;
        let w = williamson(&CovarianceMatrix::new(Mat::identity(6, 6) * nu)?)?;
        let err = w.nu.iter().map(|x| (x - nu).abs()).fold(0.0, f64::max);
        Ok((err <= 1e-12, format!("max |ν − {nu:.4}| = {err:.2e}")))
    })()));
    out
}

fn oracle_checks(rng: &mut ChaCha20Rng) -> Vec<CheckResult> {
    let mut out = Vec::new();
    out.push(from_result("cutoff-for-energy", (|| {
        let d = cutoff_for_energy(8.0, 1e-9)?;
        Ok((d == 183, format!("E = 8, tol = 1e-9 gives d = {d}")))
    })()));
    out.push(from_result("fock-vs-closed-form", (|| {
        let mut worst = 0f64;
        for _ in 0..3 {
            let mut draw = |pure: bool| -> Result<GaussianState> {
                let kind = if pure { CovarianceKind::Pure } else { CovarianceKind::Mixed };
                let cov = random_covariance(1, 3.0, kind, rng)?;
                let mu = Vector::from_fn(2, |_, _| rng.random::<f64>() - 0.5);
                GaussianState::new(mu, cov)
            };
            let (a, b) = (draw(false)?, draw(false)?);
            let m = oracle_metrics(&a, &b, 64, 1e-9)?;
            worst = worst.max((m.fidelity - fidelity(&a, &b)?).abs());
            let (p, q) = (draw(true)?, draw(true)?);
            let m = oracle_metrics(&p, &q, 64, 1e-9)?;
            worst = worst.max((m.fidelity - fidelity_pure(&p, &q)?).abs());
            worst = worst.max((m.trace_distance - trace_distance_pure(&p, &q)?).abs());
        }
        Ok((worst <= 1e-6, format!("max deviation {worst:.2e}")))
    })()));
    out.push(from_result("fock-inside-bracket", (|| {
        let a = GaussianState::new(Vector::from_vec(vec![0.3, -0.2]), random_covariance(1, 3.0, CovarianceKind::Mixed, rng)?)?;
        let b = GaussianState::new(Vector::from_vec(vec![-0.1, 0.1]), random_covariance(1, 3.0, CovarianceKind::Mixed, rng)?)?;
        let exact = oracle_metrics(&a, &b, 64, 1e-9)?.trace_distance;
        let br = trace_distance_bounds(&a, &b, 0, rng)?;
        Ok((br.contains(exact, 1e-9), format!("{:.5} ≤ {exact:.5} ≤ {:.5}", br.lower, br.upper)))
    })()));
    out.push(from_result("fock-vacuum-probability", (|| {
        let st = GaussianState::single_mode([0.4, 0.1], 0.3, 1.2, 0.4)?;
        let rho = crate::fock::fock_density(&st, 64, 1e-9)?;
        let err = (rho.vacuum_probability() - vacuum_probability(&st)).abs();
        Ok((err <= 1e-9, format!("deviation {err:.2e}")))
    })()));
    out
}

fn unit(n: usize, i: usize) -> Mat {
    Mat::from_fn(n, 1, |r, _| if r == i { 1.0 } else { 0.0 })
}

fn ensemble_checks(rng: &mut ChaCha20Rng) -> Vec<CheckResult> {
    let mut out = Vec::new();
    out.push(from_result("passive-orthogonal-kl", (|| {
        let f = OverlapFamily::from_members(9, vec![unit(9, 0), unit(9, 1)])?;
        let kind = EnsembleKind::PassiveC1 { eps: 1.0 };
        let rep = separation_report(kind, &build_ensemble(kind, Some(&f))?, Some(&f))?;
        let kl = rep.pairs[0].kl;
        Ok(((kl - 1.0 / 90.0).abs() <= 1e-12, format!("KL = {kl:.12} (1/90 = {:.12})", 1.0 / 90.0)))
    })()));
    out.push(from_result("family-separations", (|| {
        let f = sample_overlap_family(18, 8, 10_000, rng)?;
        let kinds = [
            EnsembleKind::PassiveC1 { eps: 0.27 },
            EnsembleKind::PureC2 { eps: 0.27 },
            EnsembleKind::HeterodyneHardC3 { eps: 0.27, lambda: 4.0 },
            EnsembleKind::SqueezedPairE1 { eps: 0.2, a: 8.0, phi: 0.0 },
        ];
        let mut detail = Vec::new();
        let mut ok = true;
        for k in kinds {
            let fam = k.needs_family().then_some(&f);
            let rep = separation_report(k, &build_ensemble(k, fam)?, fam)?;
            ok &= rep.min_d_lower >= rep.promised - 1e-12;
            detail.push(format!("{} {:.4}≥{:.4}", k.name(), rep.min_d_lower, rep.promised));
        }
        Ok((ok, detail.join(", ")))
    })()));
    out
}

fn identity_checks(rng: &mut ChaCha20Rng) -> Vec<CheckResult> {
    let mut out = Vec::new();
    out.push(from_result("kl-one-dimensional", (|| {
        let (m1, s1, m2, s2) = (0.3, 1.7, -0.4, 0.6);
        let p = GaussianDistribution::new(Vector::from_vec(vec![m1]), Mat::from_element(1, 1, s1 * s1))?;
        let q = GaussianDistribution::new(Vector::from_vec(vec![m2]), Mat::from_element(1, 1, s2 * s2))?;
        let exact = (s2 / s1).ln() + (s1 * s1 + (m1 - m2) * (m1 - m2)) / (2.0 * s2 * s2) - 0.5;
        let kl = gaussian_kl(&p, &q)?;
        Ok(((kl - exact).abs() <= 1e-12, format!("{kl:.12} vs {exact:.12}")))
    })()));
    out.push(from_result("divergence-ordering", (|| {
        // TV ≤ √(KL/2) and KL ≤ log(1 + χ²) on random pairs.
        let mut ok = true;
        for _ in 0..20 {
            let a = random_covariance(2, 4.0, CovarianceKind::Mixed, rng)?;
            let b = random_covariance(2, 4.0, CovarianceKind::Mixed, rng)?;
            let p = GaussianDistribution::new(Vector::zeros(4), a.matrix() * 2.0)?;
            let q = GaussianDistribution::new(Vector::from_fn(4, |_, _| rng.random::<f64>() * 0.5), b.matrix() * 2.0)?;
            let kl = gaussian_kl(&p, &q)?;
            let br = tv_bracket(&p, &q)?;
            ok &= br.lower <= (kl / 2.0).sqrt() + 1e-12;
            if let Ok(chi) = gaussian_chi2(&p, &q) {
                ok &= kl <= chi.ln_1p() + 1e-10;
            }
        }
        Ok((ok, "20 random pairs".into()))
    })()));
    out.push(from_result("pure-trace-fidelity", (|| {
        let a = GaussianState::single_mode([0.2, 0.0], 0.25, 1.0, 0.3)?;
        let b = GaussianState::vacuum(1);
        let f = fidelity_pure(&a, &b)?;
        let t = trace_distance_pure(&a, &b)?;
        Ok(((t - (1.0 - f).sqrt()).abs() <= 1e-14, format!("T = {t:.6}, √(1−F) = {:.6}", (1.0 - f).sqrt())))
    })()));
    out
}

/// Runs one suite (or all of them) with a fixed seed.
pub fn validation_suite(suite: Suite, seed: u64) -> Vec<CheckResult> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    if matches!(suite, Suite::Symplectic | Suite::All) {
        out.extend(symplectic_checks(&mut rng));
    }
    if matches!(suite, Suite::Oracle | Suite::All) {
        out.extend(oracle_checks(&mut rng));
    }
    if matches!(suite, Suite::Ensembles | Suite::All) {
        out.extend(ensemble_checks(&mut rng));
    }
    if matches!(suite, Suite::Identities | Suite::All) {
        out.extend(identity_checks(&mut rng));
    }
    out
}
