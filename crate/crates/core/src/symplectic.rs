//! Symplectic structure on phase space with quadratures ordered
//! (x₁…xₙ, p₁…pₙ); vacuum covariance is ½I.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Vector};

/// Absolute asymmetry accepted before a matrix is rejected (scaled by the
/// largest entry when that exceeds one).
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Default relative validity margin.
pub const VALIDITY_TOL: f64 = 1e-8;
/// Distance from ½ within which a symplectic eigenvalue counts as pure.
pub const PURITY_WINDOW: f64 = 1e-6;
/// Relative gap under which symplectic eigenvalues are treated as one cluster.
pub const CLUSTER_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    pub n: usize,
    pub matrix: Mat,
}

pub fn symplectic_form(n: usize) -> Result<SymplecticForm> {
    if n == 0 {
        return Err(Error::Domain("mode count must be at least 1".into()));
    }
    Ok(SymplecticForm {
        n,
        matrix: omega(n),
    })
}

/// Ω = ((0, I), (−I, 0)) for `n` modes.
pub fn omega(n: usize) -> Mat {
    let mut w = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        w[(i, n + i)] = 1.0;
        w[(n + i, i)] = -1.0;
    }
    w
}

/// A real symmetric 2n×2n matrix with a mode count attached.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    n: usize,
    entries: Mat,
}

impl CovarianceMatrix {
    /// Checks shape and symmetry, then stores the exactly symmetrized matrix.
    pub fn new(entries: Mat) -> Result<Self> {
        if !linalg::is_square(&entries) || entries.nrows() % 2 != 0 || entries.nrows() == 0 {
            return Err(Error::Domain(format!(
                "covariance must be 2n×2n, got {}×{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("covariance has non-finite entries".into()));
        }
        let dev = linalg::max_asymmetry(&entries);
        if dev > SYMMETRY_TOL * entries.amax().max(1.0) {
            return Err(Error::Asymmetric { max_deviation: dev });
        }
        Ok(Self {
            n: entries.nrows() / 2,
            entries: linalg::symmetrize(&entries),
        })
    }

    pub fn vacuum(n: usize) -> Self {
        Self {
            n,
            entries: Mat::identity(2 * n, 2 * n) * 0.5,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &Mat {
        &self.entries
    }

    pub fn into_matrix(self) -> Mat {
        self.entries
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilliamsonResiduals {
    /// ‖SΩSᵀ − Ω‖_max
    pub symplectic: f64,
    /// ‖S·diag(ν,ν)·Sᵀ − V‖_F / ‖V‖_F
    pub reconstruction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WilliamsonDecomposition {
    pub s: Mat,
    /// Symplectic eigenvalues, descending.
    pub nu: Vec<f64>,
    pub residuals: WilliamsonResiduals,
}

impl WilliamsonDecomposition {
    /// diag(ν, ν) in the (x…, p…) ordering.
    pub fn d(&self) -> Mat {
        let n = self.nu.len();
        Mat::from_fn(2 * n, 2 * n, |i, j| if i == j { self.nu[i % n] } else { 0.0 })
    }
}

/// Symplectic spectrum from A(V) = −ΩVΩV, whose eigenvalues are ν² with
/// multiplicity two. A(V) is similar to the symmetric V^{1/2}(ΩᵀVΩ)V^{1/2}, so a
/// symmetric solver suffices. Returned descending.
pub fn symplectic_spectrum(v: &Mat) -> Result<Vec<f64>> {
    let n = v.nrows() / 2;
    let min = linalg::min_eigenvalue(v);
    if min <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    let w = omega(n);
    let half = linalg::sqrtm_psd(v);
    let a = &half * w.transpose() * v * &w * &half;
    let (ev, _) = linalg::sym_eigen(&a);
    let mut nu: Vec<f64> = (0..n)
        .map(|k| {
            let hi = ev[2 * n - 1 - 2 * k].max(0.0);
            let lo = ev[2 * n - 2 - 2 * k].max(0.0);
            (0.5 * (hi + lo)).sqrt()
        })
        .collect();
    nu.sort_by(|a, b| b.total_cmp(a));
    Ok(nu)
}

/// Williamson normal form V = S·diag(ν,ν)·Sᵀ.
///
/// With M = V^{−1/2}ΩV^{−1/2} (antisymmetric), the eigenvalues of MᵀM are 1/ν².
/// Each eigenplane is spanned by a pair (a, b = −νMa), and
/// S = V^{1/2}·[a₁…aₙ b₁…bₙ]·diag(ν,ν)^{−1/2}.
pub fn williamson(v: &CovarianceMatrix) -> Result<WilliamsonDecomposition> {
    let n = v.n();
    let vm = v.matrix();
    let (lam, vecs) = linalg::sym_eigen(vm);
    if lam[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: lam[0],
        });
    }
    let diag = |f: &dyn Fn(f64) -> f64| {
        Mat::from_diagonal(&Vector::from_iterator(lam.len(), lam.iter().map(|&x| f(x))))
    };
    let half = &vecs * diag(&|x| x.sqrt()) * vecs.transpose();
    let inv_half = &vecs * diag(&|x| 1.0 / x.sqrt()) * vecs.transpose();
    let w = omega(n);
    let mut m = &inv_half * &w * &inv_half;
    m = (&m - m.transpose()) * 0.5;
    let g = m.transpose() * &m;
    let (gvals, gvecs) = linalg::sym_eigen(&g);

    // Clusters of (numerically) equal 1/ν², ascending, so ν comes out descending.
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for k in 0..2 * n {
        match clusters.last_mut() {
            Some(c) if (gvals[k] - gvals[c[0]]).abs() <= CLUSTER_TOL * gvals[c[0]].abs().max(1e-300) => {
                c.push(k)
            }
            _ => clusters.push(vec![k]),
        }
    }

    let mut chosen: Vec<Vector> = Vec::with_capacity(2 * n);
    let mut pairs: Vec<(f64, Vector, Vector)> = Vec::with_capacity(n);
    for cluster in &clusters {
        for &k in cluster {
            if pairs.len() == n {
                break;
            }
            let mut a = gvecs.column(k).into_owned();
            orthogonalize(&mut a, &chosen);
            let norm = a.norm();
            if norm < 0.5 {
                continue;
            }
            a /= norm;
            let ma = &m * &a;
            let nu = 1.0 / ma.norm();
            let mut b = ma * (-nu);
            orthogonalize(&mut b, &chosen);
            b.axpy(-a.dot(&b), &a, 1.0);
            b /= b.norm();
            chosen.push(a.clone());
            chosen.push(b.clone());
            pairs.push((nu, a, b));
        }
    }
    if pairs.len() != n {
        return Err(Error::Domain(format!(
            "williamson: found {} of {} symplectic eigenplanes",
            pairs.len(),
            n
        )));
    }
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));

    let dim = 2 * n;
    let mut o = Mat::zeros(dim, dim);
    let mut nu = Vec::with_capacity(n);
    for (j, (val, a, b)) in pairs.into_iter().enumerate() {
        let (a, b) = canonical_plane(a, b);
        o.set_column(j, &a);
        o.set_column(n + j, &b);
        nu.push(val);
    }
    let scale = Vector::from_iterator(dim, (0..dim).map(|i| 1.0 / nu[i % n].sqrt()));
    let s = half * o * Mat::from_diagonal(&scale);

    let dmat = Mat::from_fn(dim, dim, |i, j| if i == j { nu[i % n] } else { 0.0 });
    let residuals = WilliamsonResiduals {
        symplectic: (&s * &w * s.transpose() - &w).amax(),
        reconstruction: (&s * &dmat * s.transpose() - vm).norm() / vm.norm(),
    };
    Ok(WilliamsonDecomposition { s, nu, residuals })
}

fn orthogonalize(v: &mut Vector, basis: &[Vector]) {
    for _ in 0..2 {
        for u in basis {
            let p = u.dot(v);
            v.axpy(-p, u, 1.0);
        }
    }
}

/// Rotates an eigenplane pair so that its first row with non-negligible weight
/// reads (r, 0) with r > 0. The rotation keeps b = −νMa.
fn canonical_plane(a: Vector, b: Vector) -> (Vector, Vector) {
    let k = (0..a.len())
        .find(|&i| a[i].hypot(b[i]) > 1e-8)
        .unwrap_or(0);
    let theta = b[k].atan2(a[k]);
    let (s, c) = theta.sin_cos();
    let a2 = &a * c + &b * s;
    let b2 = &b * c - &a * s;
    (a2, b2)
}

/// ‖SΩSᵀ − Ω‖_max.
pub fn symplectic_residual(s: &Mat) -> f64 {
    let w = omega(s.nrows() / 2);
    (s * &w * s.transpose() - w).amax()
}

/// S^{−1} = −ΩSᵀΩ, exact for symplectic S.
pub fn symplectic_inverse(s: &Mat) -> Mat {
    let w = omega(s.nrows() / 2);
    -(&w * s.transpose() * &w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidityClass {
    Invalid,
    MixedValid,
    PureValid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Validity {
    pub class: ValidityClass,
    pub min_nu: f64,
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        self.class != ValidityClass::Invalid
    }

    pub fn is_pure(&self) -> bool {
        self.class == ValidityClass::PureValid
    }
}

/// Classifies V by its symplectic spectrum; `tol` is relative to ‖V‖_op.
/// Matrices that are not positive definite are reported as Invalid with
/// min_nu = 0.
pub fn validate_covariance(v: &CovarianceMatrix, tol: f64) -> Result<Validity> {
    let m = v.matrix();
    let (lam, _) = linalg::sym_eigen(m);
    if lam[0] <= 0.0 {
        return Ok(Validity {
            class: ValidityClass::Invalid,
            min_nu: 0.0,
        });
    }
    let nu = symplectic_spectrum(m)?;
    let min_nu = nu[nu.len() - 1];
    let max_nu = nu[0];
    let margin = tol * lam[lam.len() - 1];
    let class = if min_nu < 0.5 - margin {
        ValidityClass::Invalid
    } else if (max_nu - 0.5).abs() <= PURITY_WINDOW.max(margin) {
        ValidityClass::PureValid
    } else {
        ValidityClass::MixedValid
    };
    Ok(Validity { class, min_nu })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    /// Ordinary eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    pub op_norm: f64,
    pub condition_number: f64,
}

pub fn spectral_summary(v: &CovarianceMatrix) -> Result<SpectralSummary> {
    let (lam, _) = linalg::sym_eigen(v.matrix());
    let min = lam[0];
    if min <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    let max = lam[lam.len() - 1];
    Ok(SpectralSummary {
        eigenvalues: lam.iter().copied().collect(),
        op_norm: max,
        condition_number: max / min,
    })
}

/// Haar-random n×n unitary: complex Ginibre matrix, QR, then the phases of
/// R's diagonal moved into Q.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::<Complex64>::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Real embedding U = X + iY ↦ ((X, −Y), (Y, X)).
pub fn embed_unitary(u: &DMatrix<Complex64>) -> Mat {
    let n = u.nrows();
    let mut k = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = u[(i, j)];
            k[(i, j)] = z.re;
            k[(i, n + j)] = -z.im;
            k[(n + i, j)] = z.im;
            k[(n + i, n + j)] = z.re;
        }
    }
    k
}

pub fn random_orthogonal_symplectic<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat {
    embed_unitary(&haar_unitary(n, rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceKind {
    Pure,
    Mixed,
    Passive,
}

/// Single-mode squeezer diag(z…, 1/z…) in the (x…, p…) ordering.
pub fn squeezer(z: &[f64]) -> Mat {
    let n = z.len();
    Mat::from_fn(2 * n, 2 * n, |i, j| {
        if i != j {
            0.0
        } else if i < n {
            z[i]
        } else {
            1.0 / z[i - n]
        }
    })
}

fn thermal_diag(nu: &[f64]) -> Mat {
    let n = nu.len();
    Mat::from_fn(2 * n, 2 * n, |i, j| if i == j { nu[i % n] } else { 0.0 })
}

/// Random test covariance of the requested class with ‖Σ‖_op ≤ `e_cap`.
///
/// Pure: ½·K₁Z²K₁ᵀ with Z² entries log-uniform in [1, 2E].
/// Passive: K·diag(ν,ν)·Kᵀ with ν uniform in [½, E].
/// Mixed: K₁ZK₂·diag(ν,ν)·K₂ᵀZK₁ᵀ with ν ≤ min(2, E) and Z² ≤ E/ν_cap.
pub fn random_covariance<R: Rng + ?Sized>(
    n: usize,
    e_cap: f64,
    kind: CovarianceKind,
    rng: &mut R,
) -> Result<CovarianceMatrix> {
    if n == 0 {
        return Err(Error::Domain("mode count must be at least 1".into()));
    }
    if !(e_cap >= 0.5) {
        return Err(Error::Domain(format!(
            "op-norm cap {e_cap} below the vacuum value 1/2"
        )));
    }
    let m = match kind {
        CovarianceKind::Pure => {
            let k = random_orthogonal_symplectic(n, rng);
            let lmax = (2.0 * e_cap).ln();
            let z: Vec<f64> = (0..n).map(|_| (0.5 * rng.random::<f64>() * lmax).exp()).collect();
            let s = &k * squeezer(&z);
            &s * s.transpose() * 0.5
        }
        CovarianceKind::Passive => {
            let k = random_orthogonal_symplectic(n, rng);
            let nu: Vec<f64> = (0..n).map(|_| 0.5 + rng.random::<f64>() * (e_cap - 0.5)).collect();
            &k * thermal_diag(&nu) * k.transpose()
        }
        CovarianceKind::Mixed => {
            let cap = e_cap.min(2.0);
            let nu: Vec<f64> = (0..n).map(|_| 0.5 + rng.random::<f64>() * (cap - 0.5)).collect();
            let lmax = (e_cap / cap).ln().max(0.0);
            let z: Vec<f64> = (0..n).map(|_| (0.5 * rng.random::<f64>() * lmax).exp()).collect();
            let k1 = random_orthogonal_symplectic(n, rng);
            let k2 = random_orthogonal_symplectic(n, rng);
            let s = &k1 * squeezer(&z) * &k2;
            &s * thermal_diag(&nu) * s.transpose()
        }
    };
    CovarianceMatrix::new(linalg::symmetrize(&m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cov(rows: usize, data: &[f64]) -> CovarianceMatrix {
        CovarianceMatrix::new(Mat::from_row_slice(rows, rows, data)).unwrap()
    }

    #[test]
    fn omega_single_mode_layout() {
        let w = symplectic_form(1).unwrap().matrix;
        assert_eq!(w, Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
        assert_eq!(&w * &w, -Mat::identity(2, 2));
        let w3 = omega(3);
        assert_eq!(w3.transpose(), -w3);
        assert!(symplectic_form(0).is_err());
    }

    #[test]
    fn williamson_of_diag_two_half() {
        let wd = williamson(&cov(2, &[2.0, 0.0, 0.0, 0.5])).unwrap();
        assert_relative_eq!(wd.nu[0], 1.0, epsilon = 1e-12);
        let expected = Mat::from_row_slice(2, 2, &[2f64.sqrt(), 0.0, 0.0, 0.5f64.sqrt()]);
        assert_relative_eq!(wd.s, expected, epsilon = 1e-12);
        assert!(wd.residuals.symplectic < 1e-12);
        assert!(wd.residuals.reconstruction < 1e-12);
    }

    #[test]
    fn williamson_of_vacuum_is_identity() {
        let wd = williamson(&CovarianceMatrix::vacuum(3)).unwrap();
        assert!(wd.nu.iter().all(|&x| (x - 0.5).abs() < 1e-12));
        assert_relative_eq!(wd.s, Mat::identity(6, 6), epsilon = 1e-12);
    }

    #[test]
    fn williamson_rejects_indefinite() {
        let err = williamson(&cov(2, &[1.0, 0.0, 0.0, -0.1])).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { min_eigenvalue } if min_eigenvalue < 0.0));
    }

    #[test]
    fn squeezed_vacuum_is_pure() {
        let a = 9.0;
        let v = cov(2, &[0.5 * a, 0.0, 0.0, 0.5 / a]);
        let wd = williamson(&v).unwrap();
        assert_relative_eq!(wd.nu[0], 0.5, epsilon = 1e-12);
        assert_eq!(validate_covariance(&v, VALIDITY_TOL).unwrap().class, ValidityClass::PureValid);
    }

    #[test]
    fn validity_examples() {
        let vac = CovarianceMatrix::vacuum(2);
        assert_eq!(validate_covariance(&vac, VALIDITY_TOL).unwrap().class, ValidityClass::PureValid);
        let bad = cov(2, &[0.4, 0.0, 0.0, 0.4]);
        assert_eq!(validate_covariance(&bad, VALIDITY_TOL).unwrap().class, ValidityClass::Invalid);
        let th = cov(2, &[1.5, 0.0, 0.0, 1.5]);
        let v = validate_covariance(&th, VALIDITY_TOL).unwrap();
        assert_eq!(v.class, ValidityClass::MixedValid);
        assert_relative_eq!(v.min_nu, 1.5, epsilon = 1e-12);
        let neg = cov(2, &[-0.5, 0.0, 0.0, -0.5]);
        assert_eq!(validate_covariance(&neg, VALIDITY_TOL).unwrap().class, ValidityClass::Invalid);
    }

    #[test]
    fn asymmetric_input_rejected() {
        let err = CovarianceMatrix::new(Mat::from_row_slice(2, 2, &[1.0, 1e-6, 0.0, 1.0]));
        assert!(matches!(err, Err(Error::Asymmetric { .. })));
    }

    #[test]
    fn spectral_summary_condition_number() {
        let a = 4.0;
        let s = spectral_summary(&cov(2, &[0.5 * a, 0.0, 0.0, 0.5 / a])).unwrap();
        assert_relative_eq!(s.condition_number, 16.0, epsilon = 1e-12);
        let s = spectral_summary(&CovarianceMatrix::vacuum(2)).unwrap();
        assert_relative_eq!(s.condition_number, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_mode_orthosymplectic_is_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k = random_orthogonal_symplectic(1, &mut rng);
        assert_relative_eq!(k[(0, 0)], k[(1, 1)], epsilon = 1e-12);
        assert_relative_eq!(k[(0, 1)], -k[(1, 0)], epsilon = 1e-12);
        assert_relative_eq!(k.determinant(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn orthosymplectic_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=5 {
            let k = random_orthogonal_symplectic(n, &mut rng);
            assert!(symplectic_residual(&k) < 1e-10);
            assert!((&k * k.transpose() - Mat::identity(2 * n, 2 * n)).amax() < 1e-10);
            let v = CovarianceMatrix::new(&k * k.transpose() * 0.5).unwrap();
            assert!(validate_covariance(&v, VALIDITY_TOL).unwrap().is_pure());
        }
    }

    #[test]
    fn haar_second_moment() {
        // For Haar U (n×n), E|U₁₁|² = 1/n and E[(Re U₁₁)²] = 1/(2n).
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 3;
        let draws = 10_000;
        let xs: Vec<f64> = (0..draws)
            .map(|_| random_orthogonal_symplectic(n, &mut rng)[(0, 0)].powi(2))
            .collect();
        let mean = xs.iter().sum::<f64>() / draws as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
        let se = (var / draws as f64).sqrt();
        assert!((mean - 1.0 / (2.0 * n as f64)).abs() < 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn random_covariance_classes() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 1..=4 {
            let p = random_covariance(n, 8.0, CovarianceKind::Pure, &mut rng).unwrap();
            assert!(validate_covariance(&p, VALIDITY_TOL).unwrap().is_pure());
            let det = p.matrix().determinant();
            assert_relative_eq!(det, 0.25f64.powi(n as i32), max_relative = 1e-8);
            assert!(spectral_summary(&p).unwrap().op_norm <= 8.0 + 1e-9);

            let m = random_covariance(n, 8.0, CovarianceKind::Mixed, &mut rng).unwrap();
            let v = validate_covariance(&m, VALIDITY_TOL).unwrap();
            assert!(v.is_valid() && v.min_nu >= 0.5);
            assert!(spectral_summary(&m).unwrap().op_norm <= 8.0 + 1e-9);

            let q = random_covariance(n, 8.0, CovarianceKind::Passive, &mut rng).unwrap();
            let wd = williamson(&q).unwrap();
            assert!((&wd.s * wd.s.transpose() - Mat::identity(2 * n, 2 * n)).amax() < 1e-8);
        }
        assert!(random_covariance(1, 0.3, CovarianceKind::Pure, &mut rng).is_err());
    }

    #[test]
    fn spectrum_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let v = random_covariance(3, 6.0, CovarianceKind::Mixed, &mut rng).unwrap();
            let a = symplectic_spectrum(v.matrix()).unwrap();
            let b = williamson(&v).unwrap().nu;
            for (x, y) in a.iter().zip(&b) {
                assert_relative_eq!(x, y, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn symplectic_inverse_is_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let k = random_orthogonal_symplectic(2, &mut rng);
        let s = &k * squeezer(&[2.0, 0.3]);
        assert_relative_eq!(symplectic_inverse(&s) * &s, Mat::identity(4, 4), epsilon = 1e-12);
    }
}
