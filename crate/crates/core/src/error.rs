use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not symmetric (max deviation {max_deviation:.3e})")]
    Asymmetric { max_deviation: f64 },

    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("covariance is numerically singular (condition number {condition:.3e})")]
    SingularCovariance { condition: f64 },

    #[error("covariance violates the uncertainty principle (min symplectic eigenvalue {min_nu:.6})")]
    InvalidCovariance { min_nu: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not symplectic (residual {residual:.3e})")]
    NotSymplectic { residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("state is degenerate (symplectic eigenvalue {min_nu:.8} too close to 1/2)")]
    Degenerate { min_nu: f64 },

    #[error("chi-squared divergence undefined: 2*Sigma_q - Sigma_p is not positive definite")]
    Chi2Undefined,

    #[error("no sampled homodyne angle in the {side} window")]
    AbortNoAngle { side: &'static str },

    #[error("degenerate angle geometry for the mean estimate (|sin| = {sin_gap:.3e})")]
    DegenerateGeometry { sin_gap: f64 },

    #[error("unsqueezing did not settle after {rounds} rounds (last correction κ = {last_kappa:.3e})")]
    UnsqueezeExhausted { rounds: usize, last_kappa: f64 },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("overlap family construction failed after {tries} tries (best overlap {best_overlap:.4})")]
    ConstructionFailed { tries: usize, best_overlap: f64 },

    #[error("Fock cutoff {cutoff} too small (truncation mass {mass:.3e}); try d >= {suggested}")]
    CutoffTooSmall {
        cutoff: usize,
        mass: f64,
        suggested: usize,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
