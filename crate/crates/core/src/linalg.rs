//! Small dense helpers on top of nalgebra used across the crate.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Symmetric eigendecomposition with eigenvalues sorted ascending and
/// eigenvector columns permuted to match.
pub fn sym_eigen(m: &Mat) -> (Vector, Mat) {
    let eig = SymmetricEigen::new(symmetrize(m));
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = Vector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = Mat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Applies `f` to the spectrum of a symmetric matrix.
pub fn sym_apply(m: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    let (w, v) = sym_eigen(m);
    let fw = Vector::from_iterator(w.len(), w.iter().map(|&x| f(x)));
    &v * Mat::from_diagonal(&fw) * v.transpose()
}

pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

pub fn max_asymmetry(m: &Mat) -> f64 {
    (m - m.transpose()).amax()
}

pub fn op_norm_sym(m: &Mat) -> f64 {
    let (w, _) = sym_eigen(m);
    w.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn min_eigenvalue(m: &Mat) -> f64 {
    sym_eigen(m).0[0]
}

pub fn sqrtm_psd(m: &Mat) -> Mat {
    sym_apply(m, |x| x.max(0.0).sqrt())
}

pub fn inv_sqrtm_pd(m: &Mat) -> Result<Mat> {
    let (w, v) = sym_eigen(m);
    if w[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: w[0],
        });
    }
    let fw = Vector::from_iterator(w.len(), w.iter().map(|&x| 1.0 / x.sqrt()));
    Ok(&v * Mat::from_diagonal(&fw) * v.transpose())
}

/// Matrix absolute value with eigenvalues of magnitude below 1e-12 set to zero.
pub fn abs_sym(m: &Mat) -> Mat {
    sym_apply(m, |x| if x.abs() < 1e-12 { 0.0 } else { x.abs() })
}

pub fn cholesky(m: &Mat) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(symmetrize(m)).ok_or_else(|| Error::NotPositiveDefinite {
        min_eigenvalue: min_eigenvalue(m),
    })
}

pub fn log_det_pd(m: &Mat) -> Result<f64> {
    let c = cholesky(m)?;
    Ok(2.0 * c.l().diagonal().iter().map(|x| x.ln()).sum::<f64>())
}

pub fn inverse_pd(m: &Mat) -> Result<Mat> {
    Ok(cholesky(m)?.inverse())
}

pub fn is_square(m: &Mat) -> bool {
    m.nrows() == m.ncols()
}

/// Completes the orthonormal columns of `u` (d×s) to an orthonormal basis
/// and returns only the d×(d−s) complement. Candidates are the standard basis
/// vectors taken in index order, so the result is reproducible.
pub fn orthonormal_complement(u: &Mat) -> Mat {
    let d = u.nrows();
    let mut basis: Vec<Vector> = u.column_iter().map(|c| c.into_owned()).collect();
    let start = basis.len();
    for i in 0..d {
        if basis.len() == d {
            break;
        }
        let mut v = Vector::zeros(d);
        v[i] = 1.0;
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dot(&v);
                v.axpy(-proj, b, 1.0);
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v / norm);
        }
    }
    Mat::from_columns(&basis[start..])
}

/// Block-diagonal matrix from a list of blocks.
pub fn block_diag(blocks: &[&Mat]) -> Mat {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(*b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

pub fn rotation(phi: f64) -> Mat {
    let (s, c) = phi.sin_cos();
    Mat::from_row_slice(2, 2, &[c, -s, s, c])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eigen_is_sorted_and_reconstructs() {
        let m = Mat::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 1.0]);
        let (w, v) = sym_eigen(&m);
        assert!(w[0] <= w[1] && w[1] <= w[2]);
        let back = &v * Mat::from_diagonal(&w) * v.transpose();
        assert_relative_eq!(back, m, epsilon = 1e-12);
    }

    #[test]
    fn sqrt_squares_back() {
        let m = Mat::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let r = sqrtm_psd(&m);
        assert_relative_eq!(&r * &r, m, epsilon = 1e-12);
        let ri = inv_sqrtm_pd(&m).unwrap();
        assert_relative_eq!(&ri * &m * &ri, Mat::identity(2, 2), epsilon = 1e-12);
    }

    #[test]
    fn complement_of_first_axis_is_remaining_axes() {
        let mut u = Mat::zeros(3, 1);
        u[(0, 0)] = 1.0;
        let w = orthonormal_complement(&u);
        assert_eq!(w.ncols(), 2);
        assert_relative_eq!(w, Mat::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0]));
    }

    #[test]
    fn log_det_matches_determinant() {
        let m = Mat::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        assert_relative_eq!(log_det_pd(&m).unwrap(), m.determinant().ln(), epsilon = 1e-14);
        assert!(log_det_pd(&(-m)).is_err());
    }
}
