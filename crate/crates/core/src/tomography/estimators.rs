use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};
use crate::symplectic::{williamson, CovarianceMatrix};

/// Moment estimates from general-dyne outcomes v₁…v₂ₘ taken with seed V:
/// μ̂ = (1/m)·Σ_{i≤m} vᵢ and Σ̂ = (1/2m)·Σᵢ (v₂ᵢ − v₂ᵢ₋₁)(v₂ᵢ − v₂ᵢ₋₁)ᵀ − V.
/// The covariance estimate is unbiased and may be unphysical.
pub fn seeded_moment_estimate(samples: &[Vector], seed: &Mat) -> Result<(Vector, Mat)> {
    if samples.len() < 2 || samples.len() % 2 != 0 {
        return Err(Error::Precondition(format!(
            "moment estimation needs an even number (≥ 2) of samples, got {}",
            samples.len()
        )));
    }
    let d = samples[0].len();
    if seed.nrows() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: seed.nrows(),
        });
    }
    let m = samples.len() / 2;
    let mut mu = Vector::zeros(d);
    for v in &samples[..m] {
        mu += v;
    }
    mu /= m as f64;
    let mut cov = Mat::zeros(d, d);
    for pair in samples.chunks_exact(2) {
        let diff = &pair[1] - &pair[0];
        cov.ger(1.0, &diff, &diff, 1.0);
    }
    cov /= 2.0 * m as f64;
    Ok((mu, linalg::symmetrize(&(cov - seed))))
}

/// Heterodyne (V = ½I) moment estimates.
pub fn heterodyne_estimate(samples: &[Vector]) -> Result<(Vector, Mat)> {
    let d = samples.first().map_or(0, |v| v.len());
    seeded_moment_estimate(samples, &(Mat::identity(d, d) * 0.5))
}

/// Repairs a symmetric estimate into a valid covariance by raising symplectic
/// eigenvalues below ½ to ½ (keeping the Williamson frame). An input that is
/// not positive definite has no Williamson form, so its eigenvalues are first
/// floored at 1/(4·max(λ_max, ½)), the smallest eigenvalue any valid
/// covariance with that top eigenvalue can have.
pub fn project_to_physical(sigma_raw: &Mat) -> Result<CovarianceMatrix> {
    let raw = CovarianceMatrix::new(sigma_raw.clone())?;
    let (lam, vecs) = linalg::sym_eigen(raw.matrix());
    let floor = 0.25 / lam[lam.len() - 1].max(0.5);
    let repaired = if lam[0] <= 0.0 {
        let w = Vector::from_iterator(lam.len(), lam.iter().map(|&x| x.max(floor)));
        CovarianceMatrix::new(linalg::symmetrize(&(&vecs * Mat::from_diagonal(&w) * vecs.transpose())))?
    } else {
        raw
    };
    let wd = williamson(&repaired)?;
    if wd.nu.iter().all(|&v| v >= 0.5) {
        return Ok(repaired);
    }
    let n = wd.nu.len();
    let d = Mat::from_fn(2 * n, 2 * n, |i, j| if i == j { wd.nu[i % n].max(0.5) } else { 0.0 });
    CovarianceMatrix::new(linalg::symmetrize(&(&wd.s * d * wd.s.transpose())))
}

/// Nearest pure covariance in the Williamson sense: Σ̂₀ = ŜD̂Ŝᵀ ↦ ½ŜŜᵀ.
pub fn project_to_pure(sigma_raw: &Mat) -> Result<CovarianceMatrix> {
    let raw = CovarianceMatrix::new(sigma_raw.clone())?;
    let wd = williamson(&raw)?;
    CovarianceMatrix::new(linalg::symmetrize(&(&wd.s * wd.s.transpose() * 0.5)))
}
