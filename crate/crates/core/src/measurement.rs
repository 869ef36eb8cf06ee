//! Sampling Gaussian measurement outcomes from a hidden state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};
use crate::state::GaussianState;
use crate::symplectic::{validate_covariance, CovarianceMatrix, VALIDITY_TOL};

/// Seed covariance V of a general-dyne measurement; outcomes on a Gaussian
/// state follow N(μ, Σ+V).
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralDyneSeed {
    v: CovarianceMatrix,
}

impl GeneralDyneSeed {
    pub fn new(v: CovarianceMatrix) -> Result<Self> {
        let validity = validate_covariance(&v, VALIDITY_TOL)?;
        if !validity.is_valid() {
            return Err(Error::InvalidCovariance {
                min_nu: validity.min_nu,
            });
        }
        Ok(Self { v })
    }

    pub fn from_matrix(v: Mat) -> Result<Self> {
        Self::new(CovarianceMatrix::new(v)?)
    }

    /// V = ½I.
    pub fn heterodyne(n: usize) -> Self {
        Self {
            v: CovarianceMatrix::vacuum(n),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.v.n()
    }

    pub fn matrix(&self) -> &Mat {
        self.v.matrix()
    }
}

/// Finite-squeezing homodyne along e_φ = (cos φ, sin φ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomodyneSetting {
    pub phi: f64,
    pub c: f64,
}

impl HomodyneSetting {
    pub fn new(phi: f64, c: f64) -> Result<Self> {
        if !(c > 0.0) || !phi.is_finite() {
            return Err(Error::Domain(format!("homodyne setting needs c > 0, got c = {c}")));
        }
        Ok(Self { phi, c })
    }

    /// R_φ·diag(1/c, c)·R_φᵀ: added variance 1/c along e_φ.
    pub fn seed(&self) -> GeneralDyneSeed {
        let r = linalg::rotation(self.phi);
        let d = Mat::from_row_slice(2, 2, &[1.0 / self.c, 0.0, 0.0, self.c]);
        GeneralDyneSeed {
            v: CovarianceMatrix::new(linalg::symmetrize(&(&r * d * r.transpose()))).expect("rotated diagonal is symmetric"),
        }
    }

    pub fn direction(&self) -> Vector {
        Vector::from_row_slice(&[self.phi.cos(), self.phi.sin()])
    }
}

/// (μ_φ, Σ_φ) = (e_φᵀμ, e_φᵀΣe_φ) for a single-mode state.
pub fn homodyne_moments(state: &GaussianState, phi: f64) -> Result<(f64, f64)> {
    if state.n_modes() != 1 {
        return Err(Error::Precondition("homodyne moments are single-mode only".into()));
    }
    let e = Vector::from_row_slice(&[phi.cos(), phi.sin()]);
    Ok((e.dot(state.mean()), e.dot(&(state.sigma() * &e))))
}

/// One measurement call as seen by the oracle: the setting and copy count.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasurementRecord {
    GeneralDyne { seed: Mat, copies: u64 },
    Homodyne { phi: f64, c: f64, copies: u64 },
}

/// Draws from N(mean, cov) through a lower-triangular factor; if the
/// factorization fails the spectrum is floored at 1e−12 instead.
pub struct GaussianSampler {
    mean: Vector,
    factor: Mat,
}

impl GaussianSampler {
    pub fn new(mean: Vector, cov: &Mat) -> Self {
        let factor = match linalg::cholesky(cov) {
            Ok(c) => c.l(),
            Err(_) => {
                let (w, v) = linalg::sym_eigen(cov);
                let root = Vector::from_iterator(w.len(), w.iter().map(|&x| x.max(1e-12).sqrt()));
                v * Mat::from_diagonal(&root)
            }
        };
        Self { mean, factor }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        let z = Vector::from_iterator(self.mean.len(), (0..self.mean.len()).map(|_| StandardNormal.sample(rng)));
        &self.mean + &self.factor * z
    }
}

/// Copy-dispensing handle around a hidden Gaussian state. Every measured copy
/// is charged to `consumed`.
#[derive(Debug, Clone)]
pub struct StateOracle {
    truth: GaussianState,
    consumed: u64,
    rng: ChaCha20Rng,
    settings: Option<Vec<MeasurementRecord>>,
    samples: Option<Vec<Vec<f64>>>,
}

impl StateOracle {
    pub fn new(truth: GaussianState, seed: u64) -> Self {
        Self::from_rng(truth, ChaCha20Rng::seed_from_u64(seed))
    }

    pub fn from_rng(truth: GaussianState, rng: ChaCha20Rng) -> Self {
        Self {
            truth,
            consumed: 0,
            rng,
            settings: None,
            samples: None,
        }
    }

    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    pub fn n_modes(&self) -> usize {
        self.truth.n_modes()
    }

    /// The hidden state, for scoring a learner after the fact.
    pub fn truth(&self) -> &GaussianState {
        &self.truth
    }

    /// Starts recording every measurement setting.
    pub fn record_settings(&mut self) {
        self.settings.get_or_insert_with(Vec::new);
    }

    pub fn settings(&self) -> &[MeasurementRecord] {
        self.settings.as_deref().unwrap_or(&[])
    }

    /// Starts keeping every outcome (for sample dumps).
    pub fn record_samples(&mut self) {
        self.samples.get_or_insert_with(Vec::new);
    }

    pub fn take_samples(&mut self) -> Vec<Vec<f64>> {
        self.samples.as_mut().map(std::mem::take).unwrap_or_default()
    }

    fn log(&mut self, rec: MeasurementRecord) {
        if let Some(s) = self.settings.as_mut() {
            s.push(rec);
        }
    }

    fn keep(&mut self, outcome: &[f64]) {
        if let Some(s) = self.samples.as_mut() {
            s.push(outcome.to_vec());
        }
    }

    /// m draws from N(μ, Σ+V).
    pub fn sample_general_dyne(&mut self, seed: &GeneralDyneSeed, m: u64) -> Result<Vec<Vector>> {
        if seed.n_modes() != self.n_modes() {
            return Err(Error::DimensionMismatch {
                expected: self.n_modes(),
                found: seed.n_modes(),
            });
        }
        self.log(MeasurementRecord::GeneralDyne {
            seed: seed.matrix().clone(),
            copies: m,
        });
        if m == 0 {
            return Ok(Vec::new());
        }
        let sampler = GaussianSampler::new(self.truth.mean().clone(), &(self.truth.sigma() + seed.matrix()));
        let out: Vec<Vector> = (0..m).map(|_| sampler.sample(&mut self.rng)).collect();
        self.consumed += m;
        if self.samples.is_some() {
            for v in &out {
                self.keep(v.as_slice());
            }
        }
        Ok(out)
    }

    /// m homodyne outcomes: the finite-squeezing general-dyne projected on e_φ,
    /// distributed as N(μ_φ, Σ_φ + 1/c).
    pub fn sample_homodyne(&mut self, setting: &HomodyneSetting, m: u64) -> Result<Vec<f64>> {
        if self.n_modes() != 1 {
            return Err(Error::Precondition("homodyne sampling is single-mode only".into()));
        }
        self.log(MeasurementRecord::Homodyne {
            phi: setting.phi,
            c: setting.c,
            copies: m,
        });
        if m == 0 {
            return Ok(Vec::new());
        }
        // The projection of N(μ, Σ+V) on e_φ is exactly N(μ_φ, Σ_φ + 1/c).
        let e = setting.direction();
        let mu = e.dot(self.truth.mean());
        let sd = (e.dot(&(self.truth.sigma() * &e)) + 1.0 / setting.c).sqrt();
        let out: Vec<f64> = (0..m)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut self.rng);
                mu + sd * z
            })
            .collect();
        self.consumed += m;
        if self.samples.is_some() {
            for &z in &out {
                self.keep(&[z]);
            }
        }
        Ok(out)
    }

    /// A fresh oracle over a transformed hidden state, driven by a stream split
    /// off this oracle's generator. Used to simulate copy-wise quantum channels;
    /// the caller charges the copies back with `charge`.
    pub(crate) fn derive(&mut self, truth: GaussianState) -> StateOracle {
        let seed: u64 = self.rng.random();
        let mut child = StateOracle::new(truth, seed);
        if self.settings.is_some() {
            child.record_settings();
        }
        child
    }

    pub(crate) fn charge(&mut self, copies: u64) {
        self.consumed += copies;
    }
}

pub fn sample_general_dyne(oracle: &mut StateOracle, seed: &GeneralDyneSeed, m: u64) -> Result<Vec<Vector>> {
    oracle.sample_general_dyne(seed, m)
}

pub fn sample_homodyne(oracle: &mut StateOracle, setting: &HomodyneSetting, m: u64) -> Result<Vec<f64>> {
    oracle.sample_homodyne(setting, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn heterodyne_on_vacuum_has_unit_covariance() {
        let mut o = StateOracle::new(GaussianState::vacuum(2), 3);
        let m = 40_000;
        let xs = o.sample_general_dyne(&GeneralDyneSeed::heterodyne(2), m).unwrap();
        let mut c = Mat::zeros(4, 4);
        for x in &xs {
            c += x * x.transpose();
        }
        c /= m as f64;
        assert!((c - Mat::identity(4, 4)).amax() < 5.0 * (2.0 / m as f64).sqrt());
        assert_eq!(o.consumed(), m);
    }

    #[test]
    fn zero_copies_are_free() {
        let mut o = StateOracle::new(GaussianState::vacuum(1), 3);
        assert!(o.sample_general_dyne(&GeneralDyneSeed::heterodyne(1), 0).unwrap().is_empty());
        assert!(o.sample_homodyne(&HomodyneSetting::new(0.3, 5.0).unwrap(), 0).unwrap().is_empty());
        assert_eq!(o.consumed(), 0);
    }

    #[test]
    fn empirical_mean_concentrates() {
        let st = GaussianState::single_mode([1.5, -0.5], 0.2, 3.0, 0.4).unwrap();
        let mut o = StateOracle::new(st.clone(), 8);
        let m = 5000;
        let xs = o.sample_general_dyne(&GeneralDyneSeed::heterodyne(1), m).unwrap();
        let mean = xs.iter().fold(Vector::zeros(2), |a, b| a + b) / m as f64;
        let lmax = linalg::op_norm_sym(&(st.sigma() + Mat::identity(2, 2) * 0.5));
        assert!((mean - st.mean()).amax() < 3.0 * (lmax / m as f64).sqrt());
    }

    #[test]
    fn homodyne_moment_examples() {
        let vac = GaussianState::vacuum(1);
        let (mu, var) = homodyne_moments(&vac, 1.1).unwrap();
        assert_eq!(mu, 0.0);
        assert_relative_eq!(var, 0.5, epsilon = 1e-15);
        let coh = GaussianState::from_matrices(Vector::from_row_slice(&[1.0, 0.0]), Mat::identity(2, 2) * 0.5).unwrap();
        assert_relative_eq!(homodyne_moments(&coh, 0.0).unwrap().0, 1.0);
        let sq = GaussianState::single_mode([0.0, 0.0], 0.5, 2.0, 0.0).unwrap();
        assert_relative_eq!(homodyne_moments(&sq, std::f64::consts::FRAC_PI_2).unwrap().1, 2.0, epsilon = 1e-15);
        let theta = 0.3;
        let sq = GaussianState::single_mode([0.0, 0.0], 0.25, 1.0, theta).unwrap();
        assert_relative_eq!(homodyne_moments(&sq, theta).unwrap().1, 0.25, epsilon = 1e-14);
        assert_relative_eq!(homodyne_moments(&sq, theta + std::f64::consts::FRAC_PI_2).unwrap().1, 1.0, epsilon = 1e-14);
        let a = homodyne_moments(&sq, 0.9).unwrap().1;
        let b = homodyne_moments(&sq, 0.9 + std::f64::consts::PI).unwrap().1;
        assert_relative_eq!(a, b, epsilon = 1e-14);
        assert!(homodyne_moments(&GaussianState::vacuum(2), 0.0).is_err());
    }

    #[test]
    fn homodyne_variance_includes_seed_noise() {
        let mut o = StateOracle::new(GaussianState::vacuum(1), 12);
        let m = 50_000;
        let z = o.sample_homodyne(&HomodyneSetting::new(0.7, 100.0).unwrap(), m).unwrap();
        let mean = z.iter().sum::<f64>() / m as f64;
        let var = z.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        let target = 0.5 + 0.01;
        assert!((var - target).abs() < 4.0 * target * (2.0 / m as f64).sqrt());
        assert!(o.sample_homodyne(&HomodyneSetting::new(0.0, 1.0).unwrap(), 1).is_ok());
        let mut two = StateOracle::new(GaussianState::vacuum(2), 1);
        assert!(two.sample_homodyne(&HomodyneSetting::new(0.0, 1.0).unwrap(), 1).is_err());
    }

    #[test]
    fn invalid_seed_rejected() {
        assert!(GeneralDyneSeed::from_matrix(Mat::identity(2, 2) * 0.1).is_err());
        assert!(HomodyneSetting::new(0.0, 0.0).is_err());
    }

    #[test]
    fn ledger_sums_all_calls() {
        let mut o = StateOracle::new(GaussianState::vacuum(1), 1);
        o.record_settings();
        o.sample_general_dyne(&GeneralDyneSeed::heterodyne(1), 7).unwrap();
        o.sample_homodyne(&HomodyneSetting::new(0.2, 3.0).unwrap(), 11).unwrap();
        assert_eq!(o.consumed(), 18);
        assert_eq!(o.settings().len(), 2);
    }
}
