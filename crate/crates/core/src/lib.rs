//! Gaussian-state tomography toolkit.
//!
//! Conventions: quadratures are ordered (x₁…xₙ, p₁…pₙ), Ω = ((0, I), (−I, 0)),
//! and the vacuum covariance is ½I.

pub mod divergences;
pub mod ensembles;
pub mod error;
pub mod fock;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod measurement;
pub mod state;
pub mod symplectic;
pub mod tomography;
pub mod validation;

pub use error::{Error, Result};
pub use state::GaussianState;
pub use symplectic::{CovarianceMatrix, ValidityClass};
