//! Learning algorithms: moment estimators, projections, adaptive unsqueezing,
//! the pure-state and Wigner learners, the non-adaptive single-mode protocol
//! and the purification-based passive learner.

pub mod estimators;
mod learners;
mod single_mode;
mod unsqueeze;

pub use estimators::{heterodyne_estimate, project_to_physical, project_to_pure, seeded_moment_estimate};
pub use learners::{
    heterodyne_baseline_learn, heterodyne_baseline_with_budget, learn_passive_purified, learn_passive_purified_with,
    learn_pure, learn_pure_with, learn_wigner, learn_wigner_with, pure_stage_copies, WignerEstimate,
};
pub use single_mode::{
    homodyne_estimates, learn_single_mode_nonadaptive, solve_covariance_from_angles, wrapped_distance,
    AlgS1Params, AngleEstimate, AngleSolution, S1Selection,
};
pub use unsqueeze::{adaptive_unsqueeze, adaptive_unsqueeze_with, max_unsqueeze_rounds, Unsqueezed};

use crate::state::GaussianState;

/// Absolute constants the algorithms leave open, fixed once by the
/// `calibrate` example and frozen in [`Calibration::FROZEN`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    /// Copies per unsqueezing round: C·(n + ln(1/δ_t)).
    pub unsqueeze: f64,
    /// Unsqueezing stops once a round's correction has condition number ≤ this.
    pub unsqueeze_stop: f64,
    /// Pure learner final stage: 2m = C·(n² + n·ln(1/δ))/ε².
    pub pure_stage: f64,
    /// Wigner learner final stage, same shape as `pure_stage`.
    pub wigner_stage: f64,
    /// Single-mode protocol: K = ⌈C₁·E⌉.
    pub s1_angles: f64,
    /// Single-mode protocol: T = ⌈C₂·ln E/ε²⌉.
    pub s1_shots: f64,
    /// Single-mode protocol: N₀ = C₃/ε² (rounded up to even).
    pub s1_heterodyne: f64,
    /// Homodyne concentration: T = ⌈C·ln(1/δ)/ε²⌉.
    pub concentration: f64,
    /// Heterodyne baseline: N = C·n²/ε².
    pub baseline: f64,
}

impl Calibration {
    pub const FROZEN: Calibration = Calibration {
        unsqueeze: 100.0,
        unsqueeze_stop: 4.0,
        pure_stage: 3.0,
        wigner_stage: 3.0,
        s1_angles: 12.0,
        s1_shots: 3.0,
        s1_heterodyne: 40.0,
        concentration: 40.0,
        baseline: 400.0,
    };
}

impl Default for Calibration {
    fn default() -> Self {
        Self::FROZEN
    }
}

/// Which path the single-mode protocol took.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum S1Branch {
    /// κ̂ < 24: plain heterodyne estimate.
    Heterodyne,
    /// Solved from three post-selected homodyne angles.
    Squeezed,
}

/// Copies spent by one named stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageBudget {
    pub stage: &'static str,
    pub copies: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub stages: Vec<StageBudget>,
    pub branch: Option<S1Branch>,
    pub kappa_hat: Option<f64>,
    pub unsqueeze_rounds: Option<usize>,
    pub selection: Option<S1Selection>,
}

impl Diagnostics {
    pub fn total_copies(&self) -> u64 {
        self.stages.iter().map(|s| s.copies).sum()
    }

    pub(crate) fn push(&mut self, stage: &'static str, copies: u64) {
        self.stages.push(StageBudget { stage, copies });
    }
}

#[derive(Debug, Clone)]
pub struct TomographyResult {
    pub estimate: GaussianState,
    pub copies_used: u64,
    pub diagnostics: Diagnostics,
}

/// Smallest even integer ≥ max(x, 2).
pub fn even_ceil(x: f64) -> u64 {
    let c = x.max(2.0).ceil() as u64;
    c + c % 2
}

pub(crate) fn check_unit(name: &str, x: f64) -> crate::Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(crate::Error::Domain(format!("{name} must lie in (0, 1), got {x}")))
    }
}
