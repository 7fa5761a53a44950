//! Dense symmetric linear algebra: Cholesky-based ridge solve and
//! log-determinant, scatter matrices and two-component PCA.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng as _;

use crate::rng::rng_from_seed;
use crate::{Error, Result};

/// A symmetric `p x p` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    data: Array2<f64>,
}

impl SymMatrix {
    /// Wraps `data`, which must be square and exactly symmetric.
    pub fn new(data: Array2<f64>) -> Result<Self> {
        check_square(&data)?;
        let p = data.nrows();
        for i in 0..p {
            for j in 0..i {
                if data[[i, j]] != data[[j, i]] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self { data })
    }

    /// Wraps `(data + data^T) / 2`.
    pub fn symmetrized(mut data: Array2<f64>) -> Result<Self> {
        check_square(&data)?;
        let p = data.nrows();
        for i in 0..p {
            for j in 0..i {
                let v = 0.5 * (data[[i, j]] + data[[j, i]]);
                data[[i, j]] = v;
                data[[j, i]] = v;
            }
        }
        Ok(Self { data })
    }

    pub fn zeros(p: usize) -> Self {
        assert!(p >= 1, "dimension must be positive");
        Self {
            data: Array2::zeros((p, p)),
        }
    }

    pub fn identity(p: usize) -> Self {
        assert!(p >= 1, "dimension must be positive");
        Self {
            data: Array2::eye(p),
        }
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        assert!(!diag.is_empty(), "dimension must be positive");
        Self {
            data: Array2::from_diag(&Array1::from(diag.to_vec())),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[[i, j]]
    }

    /// `self + gamma * I`.
    pub fn with_ridge(&self, gamma: f64) -> Self {
        let mut data = self.data.clone();
        data.diag_mut().mapv_inplace(|v| v + gamma);
        Self { data }
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &SymMatrix, b: f64) -> Result<Self> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "matrix dimension",
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(Self {
            data: &self.data * a + &other.data * b,
        })
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            data: &self.data * a,
        }
    }

    pub fn trace(&self) -> f64 {
        self.data.diag().sum()
    }

    /// `x^T self y`.
    pub fn bilinear(&self, x: ArrayView1<f64>, y: ArrayView1<f64>) -> f64 {
        x.dot(&self.data.dot(&y))
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn check_square(data: &Array2<f64>) -> Result<()> {
    if data.nrows() == 0 {
        return Err(Error::DimensionMismatch {
            what: "matrix dimension",
            expected: 1,
            got: 0,
        });
    }
    if data.nrows() != data.ncols() {
        return Err(Error::DimensionMismatch {
            what: "square matrix columns",
            expected: data.nrows(),
            got: data.ncols(),
        });
    }
    Ok(())
}

/// Lower-triangular Cholesky factor of `S + gamma I`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    lower: Array2<f64>,
}

impl Cholesky {
    pub fn factor(s: &SymMatrix, gamma: f64) -> Result<Self> {
        let p = s.dim();
        let mut l = Array2::<f64>::zeros((p, p));
        for i in 0..p {
            for j in 0..=i {
                let (li, lj) = (l.row(i), l.row(j));
                let mut acc = s.data[[i, j]];
                if i == j {
                    acc += gamma;
                }
                acc -= li
                    .slice(ndarray::s![..j])
                    .dot(&lj.slice(ndarray::s![..j]));
                if i == j {
                    if !(acc > 0.0) || !acc.is_finite() {
                        return Err(Error::NotPositiveDefinite {
                            index: i,
                            pivot: acc,
                        });
                    }
                    l[[i, i]] = acc.sqrt();
                } else {
                    l[[i, j]] = acc / l[[j, j]];
                }
            }
        }
        Ok(Self { lower: l })
    }

    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    pub fn lower(&self) -> ArrayView2<'_, f64> {
        self.lower.view()
    }

    /// Solves `L y = b`.
    pub fn forward(&self, b: ArrayView1<f64>) -> Array1<f64> {
        let p = self.dim();
        let mut y = Array1::<f64>::zeros(p);
        for i in 0..p {
            let row = self.lower.row(i);
            let acc = b[i] - row.slice(ndarray::s![..i]).dot(&y.slice(ndarray::s![..i]));
            y[i] = acc / row[i];
        }
        y
    }

    /// Solves `L^T x = y`.
    pub fn backward(&self, y: ArrayView1<f64>) -> Array1<f64> {
        let p = self.dim();
        let mut x = y.to_owned();
        for i in (0..p).rev() {
            x[i] /= self.lower[[i, i]];
            let xi = x[i];
            for k in 0..i {
                x[k] -= self.lower[[i, k]] * xi;
            }
        }
        x
    }

    pub fn solve(&self, b: ArrayView1<f64>) -> Result<Array1<f64>> {
        if b.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                what: "right-hand side length",
                expected: self.dim(),
                got: b.len(),
            });
        }
        Ok(self.backward(self.forward(b).view()))
    }

    /// `log |L L^T|`.
    pub fn logdet(&self) -> f64 {
        self.lower.diag().iter().map(|v| 2.0 * v.ln()).sum()
    }

    /// `(x - center)^T (L L^T)^{-1} (x - center)`.
    pub fn mahalanobis_sq(&self, x: ArrayView1<f64>, center: ArrayView1<f64>) -> f64 {
        let diff = &x - &center;
        let y = self.forward(diff.view());
        y.dot(&y)
    }

    /// `L^{-1}`, lower triangular.
    pub fn inverse_lower(&self) -> Array2<f64> {
        let p = self.dim();
        let mut inv = Array2::<f64>::zeros((p, p));
        for j in 0..p {
            inv[[j, j]] = 1.0 / self.lower[[j, j]];
            for i in j + 1..p {
                let mut acc = 0.0;
                for k in j..i {
                    acc += self.lower[[i, k]] * inv[[k, j]];
                }
                inv[[i, j]] = -acc / self.lower[[i, i]];
            }
        }
        inv
    }
}

/// Solves `(S + gamma I) x = b` by Cholesky.
pub fn ridge_solve(s: &SymMatrix, gamma: f64, b: ArrayView1<f64>) -> Result<Array1<f64>> {
    Cholesky::factor(s, gamma)?.solve(b)
}

/// `log |S + gamma I|`.
pub fn logdet_pd(s: &SymMatrix, gamma: f64) -> Result<f64> {
    Ok(Cholesky::factor(s, gamma)?.logdet())
}

/// `X^T X`, symmetrized.
pub fn gram(x: ArrayView2<f64>) -> SymMatrix {
    let g = x.t().dot(&x);
    SymMatrix::symmetrized(g).expect("gram matrix is square")
}

/// `(1/k) sum_i (x_i - c)(x_i - c)^T` accumulated as raw second moments with
/// the centering identity `sum x x^T - k c c^T - ...` applied at the end.
pub fn centered_scatter(x: ArrayView2<f64>, center: ArrayView1<f64>) -> Array2<f64> {
    let k = x.nrows() as f64;
    let mut m = x.t().dot(&x);
    let sum = x.sum_axis(Axis(0));
    // sum (x - c)(x - c)^T = sum x x^T - s c^T - c s^T + k c c^T
    let p = center.len();
    for i in 0..p {
        for j in 0..p {
            m[[i, j]] += -sum[i] * center[j] - center[i] * sum[j] + k * center[i] * center[j];
        }
    }
    m
}

/// Projections of the column-centered rows of `x` onto the two leading
/// eigenvectors of its covariance. Each eigenvector's first nonzero loading
/// is made positive. A zero covariance yields all-zero projections.
pub fn pca_top2(x: ArrayView2<f64>) -> Result<Array2<f64>> {
    let (k, p) = x.dim();
    if k < 2 {
        return Err(Error::DimensionMismatch {
            what: "pca sample count",
            expected: 2,
            got: k,
        });
    }
    if p < 2 {
        return Err(Error::DimensionMismatch {
            what: "pca feature count",
            expected: 2,
            got: p,
        });
    }
    let mean = x.mean_axis(Axis(0)).expect("k >= 2");
    let centered = &x - &mean;
    let cov = centered.t().dot(&centered) / k as f64;
    if cov.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateSpectrum("covariance has non-finite entries"));
    }
    if cov.iter().all(|&v| v == 0.0) {
        return Ok(Array2::zeros((k, 2)));
    }
    let vecs = top2_eigenvectors(&cov);
    Ok(centered.dot(&vecs))
}

/// Two leading eigenvectors (as columns) of a symmetric PSD matrix by
/// subspace iteration with a 2x2 Rayleigh-Ritz step.
fn top2_eigenvectors(c: &Array2<f64>) -> Array2<f64> {
    const MAX_ITER: usize = 20_000;
    let p = c.nrows();
    let scale = c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut rng = rng_from_seed(0x5ca1_ab1e);
    let mut v = Array2::<f64>::from_shape_fn((p, 2), |_| rng.random::<f64>() - 0.5);
    orthonormalize(&mut v, None);

    for _ in 0..MAX_ITER {
        let prev = v.clone();
        let mut w = c.dot(&v);
        orthonormalize(&mut w, Some(&prev));
        // Rayleigh-Ritz on span(w).
        let cw = c.dot(&w);
        let h = w.t().dot(&cw);
        let (rot, _) = sym2_eigen(h[[0, 0]], h[[0, 1]], h[[1, 1]]);
        v = w.dot(&rot);
        let cv = c.dot(&v);
        let ritz = v.t().dot(&cv);
        let resid = (0..2)
            .map(|i| {
                let r = &cv.column(i) - &(&v.column(i) * ritz[[i, i]]);
                r.dot(&r).sqrt()
            })
            .fold(0.0, f64::max);
        if resid <= 1e-13 * scale {
            break;
        }
    }
    for mut col in v.columns_mut() {
        let tol = 1e-12 * col.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if let Some(first) = col.iter().find(|x| x.abs() > tol) {
            if *first < 0.0 {
                col.mapv_inplace(|x| -x);
            }
        }
    }
    v
}

/// Gram-Schmidt on the two columns of `w`. A column that collapses is
/// replaced by the matching column of `fallback` (or a coordinate vector).
fn orthonormalize(w: &mut Array2<f64>, fallback: Option<&Array2<f64>>) {
    let p = w.nrows();
    for j in 0..2 {
        let original_norm = w.column(j).dot(&w.column(j)).sqrt();
        let mut attempt = 0;
        loop {
            for i in 0..j {
                let proj = w.column(i).dot(&w.column(j));
                let ci = w.column(i).to_owned();
                w.column_mut(j).scaled_add(-proj, &ci);
            }
            let norm = w.column(j).dot(&w.column(j)).sqrt();
            if norm > 1e-12 * original_norm.max(f64::MIN_POSITIVE) && norm > 0.0 {
                w.column_mut(j).mapv_inplace(|x| x / norm);
                break;
            }
            let mut replacement = Array1::<f64>::zeros(p);
            match (attempt, fallback) {
                (0, Some(fb)) => replacement.assign(&fb.column(j)),
                _ => replacement[(attempt + j) % p] = 1.0,
            }
            w.column_mut(j).assign(&replacement);
            attempt += 1;
        }
    }
}

/// Eigen-decomposition of `[[a, b], [b, d]]`: columns of the rotation are
/// eigenvectors, eigenvalues in descending order.
fn sym2_eigen(a: f64, b: f64, d: f64) -> (Array2<f64>, [f64; 2]) {
    let half_tr = 0.5 * (a + d);
    let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let (l1, l2) = (half_tr + r, half_tr - r);
    let theta = 0.5 * (2.0 * b).atan2(a - d);
    let (s, c) = theta.sin_cos();
    let rot = ndarray::array![[c, -s], [s, c]];
    (rot, [l1, l2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use proptest::prelude::*;
    use rand_distr::{Distribution, StandardNormal};

    /// Cyclic Jacobi eigenvalues; independent of the Cholesky path.
    fn jacobi_eigenvalues(a: &Array2<f64>) -> Vec<f64> {
        let mut a = a.clone();
        let p = a.nrows();
        for _sweep in 0..100 {
            let off: f64 = (0..p)
                .flat_map(|i| (0..p).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[[i, j]] * a[[i, j]])
                .sum();
            if off < 1e-30 {
                break;
            }
            for q in 1..p {
                for r in 0..q {
                    if a[[r, q]].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[[q, q]] - a[[r, r]]) / (2.0 * a[[r, q]]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..p {
                        let (akr, akq) = (a[[k, r]], a[[k, q]]);
                        a[[k, r]] = c * akr - s * akq;
                        a[[k, q]] = s * akr + c * akq;
                    }
                    for k in 0..p {
                        let (ark, aqk) = (a[[r, k]], a[[q, k]]);
                        a[[r, k]] = c * ark - s * aqk;
                        a[[q, k]] = s * ark + c * aqk;
                    }
                }
            }
        }
        (0..p).map(|i| a[[i, i]]).collect()
    }

    fn random_spd(p: usize, seed: u64) -> SymMatrix {
        let mut rng = rng_from_seed(seed);
        let a = Array2::from_shape_fn((p + 3, p), |_| StandardNormal.sample(&mut rng));
        gram(a.view()).with_ridge(1.0)
    }

    fn residual(s: &SymMatrix, gamma: f64, x: &Array1<f64>, b: &Array1<f64>) -> f64 {
        let r = s.with_ridge(gamma).view().dot(x) - b;
        r.dot(&r).sqrt() / b.dot(b).sqrt()
    }

    #[test]
    fn ridge_solve_identity() {
        let b = array![1.0, 2.0, 3.0];
        let x = ridge_solve(&SymMatrix::identity(3), 0.0, b.view()).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn ridge_solve_zero_matrix_with_ridge() {
        let x = ridge_solve(&SymMatrix::zeros(2), 0.5, array![1.0, 0.0].view()).unwrap();
        assert_abs_diff_eq!(x, array![2.0, 0.0], epsilon = 1e-15);
    }

    #[test]
    fn ridge_solve_two_by_two() {
        let s = SymMatrix::new(array![[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let x = ridge_solve(&s, 0.0, array![1.0, 1.0].view()).unwrap();
        assert_abs_diff_eq!(x, array![1.0 / 3.0, 1.0 / 3.0], epsilon = 1e-15);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let s = SymMatrix::new(array![[1.0, 1.0], [1.0, 1.0]]).unwrap();
        assert!(matches!(
            ridge_solve(&s, 0.0, array![1.0, 0.0].view()),
            Err(Error::NotPositiveDefinite { index: 1, .. })
        ));
        assert!(ridge_solve(&s, 1e-6, array![1.0, 0.0].view()).is_ok());
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        assert!(matches!(
            SymMatrix::new(array![[1.0, 2.0], [0.0, 1.0]]),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn logdet_examples() {
        assert_eq!(logdet_pd(&SymMatrix::identity(4), 0.0).unwrap(), 0.0);
        let d = logdet_pd(&SymMatrix::from_diag(&[1.0, 3.0]), 1.0).unwrap();
        assert_abs_diff_eq!(d, 2f64.ln() + 4f64.ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(d, 2.0794415416798357, epsilon = 1e-12);
        let s = SymMatrix::new(array![[2.0, 1.0], [1.0, 2.0]]).unwrap();
        assert_abs_diff_eq!(logdet_pd(&s, 0.0).unwrap(), 3f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn logdet_matches_jacobi_eigenvalues() {
        for p in 1..=8 {
            let s = random_spd(p, 100 + p as u64);
            let expected: f64 = jacobi_eigenvalues(&s.data).iter().map(|l| l.ln()).sum();
            assert_abs_diff_eq!(logdet_pd(&s, 0.0).unwrap(), expected, epsilon = 1e-8);
        }
    }

    #[test]
    fn inverse_lower_is_inverse() {
        let s = random_spd(6, 3);
        let ch = Cholesky::factor(&s, 0.0).unwrap();
        let prod = ch.inverse_lower().dot(&ch.lower());
        assert_abs_diff_eq!(prod, Array2::eye(6), epsilon = 1e-12);
    }

    #[test]
    fn centered_scatter_matches_two_pass() {
        let mut rng = rng_from_seed(9);
        let x = Array2::from_shape_fn((50, 4), |_| 3.0 + Distribution::<f64>::sample(&StandardNormal, &mut rng));
        let mean = x.mean_axis(Axis(0)).unwrap();
        let c = &x - &mean;
        let two_pass = c.t().dot(&c);
        assert_abs_diff_eq!(centered_scatter(x.view(), mean.view()), two_pass, epsilon = 1e-10);
    }

    #[test]
    fn pca_identical_rows_give_zero() {
        let x = Array2::from_shape_fn((5, 3), |(_, j)| j as f64);
        assert_eq!(pca_top2(x.view()).unwrap(), Array2::zeros((5, 2)));
    }

    #[test]
    fn pca_aligns_with_dominant_axis() {
        let eps = 0.1;
        let x = array![[1.0, 0.0], [-1.0, 0.0], [0.0, eps], [0.0, -eps]];
        let z = pca_top2(x.view()).unwrap();
        // first component is the first coordinate, second the second
        assert_abs_diff_eq!(z.column(0), x.column(0), epsilon = 1e-12);
        assert_abs_diff_eq!(z.column(1), x.column(1), epsilon = 1e-12);
    }

    #[test]
    fn pca_recovers_population_variance() {
        let mut rng = rng_from_seed(21);
        let sd = [2.0, 1.0, 0.1];
        let k = 10_000;
        let x = Array2::from_shape_fn((k, 3), |(_, j)| {
            sd[j] * Distribution::<f64>::sample(&StandardNormal, &mut rng)
        });
        let z = pca_top2(x.view()).unwrap();
        let var1 = z.column(0).mapv(|v| v * v).sum() / k as f64;
        assert!((var1 - 4.0).abs() < 0.4, "var1 = {var1}");
        let dot = z.column(0).dot(&z.column(1));
        let norms = z.column(0).dot(&z.column(0)).sqrt() * z.column(1).dot(&z.column(1)).sqrt();
        assert!(dot.abs() / norms <= 1e-8);
    }

    #[test]
    fn pca_rejects_tiny_input() {
        assert!(pca_top2(Array2::<f64>::zeros((1, 3)).view()).is_err());
        assert!(pca_top2(Array2::<f64>::zeros((3, 1)).view()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ridge_solve_absorbs_gamma(p in 1usize..10, seed in any::<u64>(), gamma in 0.0f64..5.0) {
            let s = random_spd(p, seed);
            let mut rng = rng_from_seed(seed ^ 1);
            let b = Array1::from_shape_fn(p, |_| StandardNormal.sample(&mut rng));
            let x1 = ridge_solve(&s, gamma, b.view()).unwrap();
            let x2 = ridge_solve(&s.with_ridge(gamma), 0.0, b.view()).unwrap();
            let rel = (&x1 - &x2).mapv(f64::abs).sum() / x2.mapv(f64::abs).sum();
            prop_assert!(rel <= 1e-10);
            prop_assert!(residual(&s, gamma, &x1, &b) <= 1e-8);
        }

        #[test]
        fn pca_columns_are_orthogonal(k in 3usize..40, p in 2usize..7, seed in any::<u64>()) {
            let mut rng = rng_from_seed(seed);
            let x = Array2::from_shape_fn((k, p), |(_, j)| {
                (j + 1) as f64 * Distribution::<f64>::sample(&StandardNormal, &mut rng)
            });
            let z = pca_top2(x.view()).unwrap();
            let (a, b) = (z.column(0), z.column(1));
            let na = a.dot(&a).sqrt();
            let nb = b.dot(&b).sqrt();
            prop_assume!(na > 1e-9 && nb > 1e-9);
            prop_assert!(a.dot(&b).abs() / (na * nb) <= 1e-8);
        }
    }
}
