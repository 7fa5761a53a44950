//! Closed-form error rates for two Gaussian classes.
//!
//! With `delta = (mu_1 - mu_2) / 2` and `Delta^2 = delta^T Sigma^{-1} delta`
//! the Bayes error for equal priors is `Phi(-Delta)`. A linear rule that
//! assigns class 1 when `d^T S^{-1} (x - xbar) >= 0` has error
//!
//! ```text
//! R = 1/2 sum_g Phi( a^T {(-1)^g (mu_g - xbar_g) - d} / sqrt(a^T Sigma a) ),  a = S^{-1} d
//! ```
//!
//! and converges to the Bayes error at rate `m^{-1/2}` when `S` is the
//! compressed covariance built from `m` compressed samples.

use ndarray::{Array1, ArrayView1};

use crate::datasets::ClassLabel;
use crate::linalg::{ridge_solve, Cholesky, SymMatrix};
use crate::{Error, Result};

/// Standard normal CDF, `0.5 erfc(-x / sqrt 2)`.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

#[derive(Debug, Clone)]
pub enum PopulationCovariance {
    Shared(SymMatrix),
    PerClass(SymMatrix, SymMatrix),
}

/// Two Gaussian classes `N(mu_g, Sigma_g)` with priors `pi_g`.
#[derive(Debug, Clone)]
pub struct PopulationModel {
    means: [Array1<f64>; 2],
    covariance: PopulationCovariance,
    prior1: f64,
}

impl PopulationModel {
    pub fn shared(
        mu1: Array1<f64>,
        mu2: Array1<f64>,
        sigma: SymMatrix,
        prior1: f64,
    ) -> Result<Self> {
        Self::build(mu1, mu2, PopulationCovariance::Shared(sigma), prior1)
    }

    pub fn per_class(
        mu1: Array1<f64>,
        mu2: Array1<f64>,
        sigma1: SymMatrix,
        sigma2: SymMatrix,
        prior1: f64,
    ) -> Result<Self> {
        Self::build(mu1, mu2, PopulationCovariance::PerClass(sigma1, sigma2), prior1)
    }

    /// Identity covariance, equal priors and `mu_1 = -mu_2 = delta` with all
    /// coordinates of `delta` equal and `delta^T delta = delta_sq`.
    pub fn isotropic(p: usize, delta_sq: f64) -> Result<Self> {
        let c = (delta_sq / p as f64).sqrt();
        let mu1 = Array1::from_elem(p, c);
        Self::shared(mu1.clone(), -mu1, SymMatrix::identity(p), 0.5)
    }

    fn build(
        mu1: Array1<f64>,
        mu2: Array1<f64>,
        covariance: PopulationCovariance,
        prior1: f64,
    ) -> Result<Self> {
        let p = mu1.len();
        if mu2.len() != p {
            return Err(Error::DimensionMismatch {
                what: "class 2 mean length",
                expected: p,
                got: mu2.len(),
            });
        }
        if !(prior1 > 0.0 && prior1 < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "prior must lie in (0, 1), got {prior1}"
            )));
        }
        let covs: Vec<&SymMatrix> = match &covariance {
            PopulationCovariance::Shared(s) => vec![s],
            PopulationCovariance::PerClass(a, b) => vec![a, b],
        };
        for s in covs {
            if s.dim() != p {
                return Err(Error::DimensionMismatch {
                    what: "population covariance dimension",
                    expected: p,
                    got: s.dim(),
                });
            }
            Cholesky::factor(s, 0.0)?;
        }
        Ok(Self {
            means: [mu1, mu2],
            covariance,
            prior1,
        })
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    pub fn mean(&self, g: ClassLabel) -> ArrayView1<'_, f64> {
        self.means[g.index()].view()
    }

    pub fn prior(&self, g: ClassLabel) -> f64 {
        match g {
            ClassLabel::One => self.prior1,
            ClassLabel::Two => 1.0 - self.prior1,
        }
    }

    pub fn covariance(&self) -> &PopulationCovariance {
        &self.covariance
    }

    /// Covariance of class `g`.
    pub fn class_covariance(&self, g: ClassLabel) -> &SymMatrix {
        match (&self.covariance, g) {
            (PopulationCovariance::Shared(s), _) => s,
            (PopulationCovariance::PerClass(s, _), ClassLabel::One) => s,
            (PopulationCovariance::PerClass(_, s), ClassLabel::Two) => s,
        }
    }

    pub fn shared_covariance(&self) -> Result<&SymMatrix> {
        match &self.covariance {
            PopulationCovariance::Shared(s) => Ok(s),
            PopulationCovariance::PerClass(..) => Err(Error::InvalidParameter(
                "population has class-specific covariances".into(),
            )),
        }
    }

    /// `(mu_1 - mu_2) / 2`.
    pub fn delta(&self) -> Array1<f64> {
        (&self.means[0] - &self.means[1]) * 0.5
    }

    /// `(mu_1 + mu_2) / 2`.
    pub fn midpoint(&self) -> Array1<f64> {
        (&self.means[0] + &self.means[1]) * 0.5
    }

    /// `Delta^2 = delta^T Sigma^{-1} delta`.
    pub fn separation_sq(&self) -> Result<f64> {
        let delta = self.delta();
        let x = ridge_solve(self.shared_covariance()?, 0.0, delta.view())?;
        Ok(delta.dot(&x))
    }

    fn require_equal_priors(&self) -> Result<()> {
        if (self.prior1 - 0.5).abs() > 1e-12 {
            return Err(Error::UnequalPriors(self.prior1));
        }
        Ok(())
    }
}

/// Bayes error `Phi(-sqrt(Delta^2))` for equal priors and a shared
/// covariance.
pub fn bayes_error(pop: &PopulationModel) -> Result<f64> {
    pop.require_equal_priors()?;
    Ok(normal_cdf(-pop.separation_sq()?.sqrt()))
}

/// Exact error of the rule "class 1 iff `d^T S_c^{-1} (x - xbar) >= 0`" on
/// the population, for the fitted `d`, `S_c` (ridge already included) and
/// training class means. `d` is used as given.
pub fn compressed_rule_error(
    pop: &PopulationModel,
    d: ArrayView1<f64>,
    s_c: &SymMatrix,
    xbar1: ArrayView1<f64>,
    xbar2: ArrayView1<f64>,
) -> Result<f64> {
    pop.require_equal_priors()?;
    let sigma = pop.shared_covariance()?;
    let p = pop.dim();
    for (what, len) in [
        ("d length", d.len()),
        ("S_c dimension", s_c.dim()),
        ("class 1 mean length", xbar1.len()),
        ("class 2 mean length", xbar2.len()),
    ] {
        if len != p {
            return Err(Error::DimensionMismatch {
                what,
                expected: p,
                got: len,
            });
        }
    }
    if d.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroDirection);
    }
    let a = ridge_solve(s_c, 0.0, d)?;
    let spread = sigma.bilinear(a.view(), a.view()).sqrt();
    let mut total = 0.0;
    for (g, xbar) in [(ClassLabel::One, xbar1), (ClassLabel::Two, xbar2)] {
        let sign = if g == ClassLabel::One { -1.0 } else { 1.0 };
        let shift = (&pop.mean(g) - &xbar) * sign - d;
        total += normal_cdf(a.dot(&shift) / spread);
    }
    Ok(0.5 * total)
}

/// `K_s = {s log(1 + 1/s)}^{-1/2}`, the sub-Gaussian norm of a sparse
/// Rademacher entry divided by `sqrt(s)`.
pub fn subgaussian_norm_ks(s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidSparsity(s));
    }
    Ok(1.0 / (s * (1.0 + 1.0 / s).ln()).sqrt())
}

/// `C P K_s^2 sqrt((log(1/eta) + p) / m)` with
/// `P = phi(Delta) (Delta + 1)`. `C` is the unknown absolute constant; the
/// value is meaningful only up to that factor.
pub fn excess_error_bound(
    pop: &PopulationModel,
    s: f64,
    m: usize,
    p: usize,
    eta: f64,
    c: f64,
) -> Result<f64> {
    pop.require_equal_priors()?;
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidEta(eta));
    }
    if m == 0 || !(c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need m > 0 and C > 0, got m = {m}, C = {c}"
        )));
    }
    let ks = subgaussian_norm_ks(s)?;
    let delta = pop.separation_sq()?.sqrt();
    let pfac = normal_pdf(delta) * (delta + 1.0);
    Ok(c * pfac * ks * ks * (((1.0 / eta).ln() + p as f64) / m as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    /// Maclaurin series for erf; independent of libm.
    fn erf_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        let mut n = 0.0;
        loop {
            n += 1.0;
            term *= -x * x / n;
            let add = term / (2.0 * n + 1.0);
            sum += add;
            if add.abs() < 1e-18 {
                break;
            }
        }
        sum * 2.0 / std::f64::consts::PI.sqrt()
    }

    fn phi_oracle(x: f64) -> f64 {
        0.5 * (1.0 + erf_series(x / std::f64::consts::SQRT_2))
    }

    #[test]
    fn normal_cdf_matches_series() {
        for x in [-3.0, -2.0, -1.0, -0.3, 0.0, 0.5, 1.0, 2.5] {
            assert_abs_diff_eq!(normal_cdf(x), phi_oracle(x), epsilon = 1e-12);
        }
        assert_abs_diff_eq!(normal_cdf(-1.0), 0.158655253931457, epsilon = 1e-12);
    }

    #[test]
    fn bayes_error_examples() {
        let same = PopulationModel::shared(array![1.0, 2.0], array![1.0, 2.0], SymMatrix::identity(2), 0.5)
            .unwrap();
        assert_eq!(bayes_error(&same).unwrap(), 0.5);

        let unit = PopulationModel::isotropic(3, 1.0).unwrap();
        assert_abs_diff_eq!(bayes_error(&unit).unwrap(), phi_oracle(-1.0), epsilon = 1e-12);

        let scalar =
            PopulationModel::shared(array![1.0], array![-1.0], SymMatrix::identity(1), 0.5).unwrap();
        assert_abs_diff_eq!(scalar.delta()[0], 1.0);
        assert_abs_diff_eq!(bayes_error(&scalar).unwrap(), phi_oracle(-1.0), epsilon = 1e-12);

        let skew =
            PopulationModel::shared(array![1.0], array![-1.0], SymMatrix::identity(1), 0.3).unwrap();
        assert!(matches!(bayes_error(&skew), Err(Error::UnequalPriors(_))));
    }

    #[test]
    fn plug_in_identity() {
        let sigma = SymMatrix::new(array![[2.0, 0.5, 0.0], [0.5, 1.0, 0.2], [0.0, 0.2, 1.5]]).unwrap();
        let pop =
            PopulationModel::shared(array![1.0, 0.0, -0.5], array![-0.2, 0.3, 0.5], sigma.clone(), 0.5)
                .unwrap();
        let d = pop.delta();
        let r = compressed_rule_error(&pop, d.view(), &sigma, pop.mean(ClassLabel::One), pop.mean(ClassLabel::Two))
            .unwrap();
        assert_abs_diff_eq!(r, bayes_error(&pop).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn zero_direction_is_rejected() {
        let pop = PopulationModel::isotropic(2, 1.0).unwrap();
        let z = Array1::zeros(2);
        assert!(matches!(
            compressed_rule_error(&pop, z.view(), &SymMatrix::identity(2), z.view(), z.view()),
            Err(Error::ZeroDirection)
        ));
    }

    #[test]
    fn ks_values() {
        let ks = subgaussian_norm_ks(0.5).unwrap();
        assert_abs_diff_eq!(ks * ks, 1.0 / (0.5 * 3f64.ln()), epsilon = 1e-12);
        assert_abs_diff_eq!(ks * ks, 1.8204784532536746, epsilon = 1e-10);
        let ks = subgaussian_norm_ks(0.01).unwrap();
        assert_abs_diff_eq!(ks * ks, 21.667906533553168, epsilon = 1e-10);
        let mut prev = f64::INFINITY;
        for i in 1..=80 {
            let k = subgaussian_norm_ks(i as f64 / 100.0).unwrap();
            assert!(k < prev);
            prev = k;
        }
        for s in [0.0, 1.0, -1.0] {
            assert!(matches!(subgaussian_norm_ks(s), Err(Error::InvalidSparsity(_))));
        }
    }

    #[test]
    fn bound_hand_value() {
        let pop = PopulationModel::isotropic(10, 1.0).unwrap();
        let b = excess_error_bound(&pop, 0.01, 1000, 10, 0.05, 1.0).unwrap();
        // phi(1) * 2 * K_s^2 * sqrt((ln 20 + 10) / 1000)
        let phi1 = (-0.5f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let expected = phi1 * 2.0 * 21.667906533553168 * ((20f64.ln() + 10.0) / 1000.0).sqrt();
        assert_abs_diff_eq!(b, expected, epsilon = 1e-8);
        assert!((b - 1.194).abs() < 0.002, "bound {b}");
    }

    #[test]
    fn bound_scaling() {
        let pop = PopulationModel::isotropic(4, 1.0).unwrap();
        let b1 = excess_error_bound(&pop, 0.1, 100, 4, 0.1, 2.0).unwrap();
        let b4 = excess_error_bound(&pop, 0.1, 400, 4, 0.1, 2.0).unwrap();
        assert_abs_diff_eq!(b1 / b4, 2.0, epsilon = 1e-12);
        let far = PopulationModel::isotropic(4, 400.0).unwrap();
        assert!(excess_error_bound(&far, 0.1, 100, 4, 0.1, 2.0).unwrap() < 1e-80);
        assert!(matches!(
            excess_error_bound(&pop, 0.1, 100, 4, 1.0, 1.0),
            Err(Error::InvalidEta(_))
        ));
    }
}
