//! Two-class linear and quadratic discriminant rules.
//!
//! Linear rule: assign `x` to the class minimizing
//! `(beta^T (x - xbar_g))^2 / v - 2 log(n_g / n)`, where `v` is the variance
//! of the discriminant score under the covariance the variant fitted:
//!
//! | variant    | `beta`                         | `v`                                   |
//! |------------|--------------------------------|---------------------------------------|
//! | Full       | `(S_w + gI)^{-1} d`            | `beta^T (S_w + gI) beta`              |
//! | Compressed | `(S_wc + gI)^{-1} d`           | `beta^T (S_wc + gI) beta`             |
//! | Projected  | as Compressed                  | pooled variance of `beta^T x_i`       |
//! | Subsampled | Full LDA on a stratified subset| as Full, on the subset                |
//! | FRF        | `(S_joint + gI)^{-1} d`        | pooled variance of `beta^T x_i`       |
//!
//! Quadratic rule: minimize
//! `(x - xbar_g)^T (S_g + gI)^{-1} (x - xbar_g) + log|S_g + gI| - 2 log(n_g / n)`.
//!
//! Ties go to class 1.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::compression::{
    split_compression_sizes, CompressedClassData, MatrixFamily, SparseCompressionMatrix,
};
use crate::datasets::{sample_class_rows, ClassLabel, LabeledDataset};
use crate::linalg::{gram, ridge_solve, Cholesky, SymMatrix};
use crate::rng::{child_seed, rng_from_seed};
use crate::{Error, Result};

/// Class means, overall mean and the scaled mean difference
/// `d = sqrt(n_1 n_2) / n (xbar_1 - xbar_2)`.
#[derive(Debug, Clone)]
pub struct ClassStatistics {
    means: [Array1<f64>; 2],
    overall_mean: Array1<f64>,
    d: Array1<f64>,
    counts: [usize; 2],
}

impl ClassStatistics {
    pub fn mean(&self, g: ClassLabel) -> ArrayView1<'_, f64> {
        self.means[g.index()].view()
    }

    pub fn overall_mean(&self) -> ArrayView1<'_, f64> {
        self.overall_mean.view()
    }

    pub fn d(&self) -> ArrayView1<'_, f64> {
        self.d.view()
    }

    pub fn count(&self, g: ClassLabel) -> usize {
        self.counts[g.index()]
    }

    pub fn total(&self) -> usize {
        self.counts[0] + self.counts[1]
    }

    pub fn prior(&self, g: ClassLabel) -> f64 {
        self.count(g) as f64 / self.total() as f64
    }
}

/// One pass over the rows.
pub fn class_statistics(data: &LabeledDataset) -> Result<ClassStatistics> {
    data.require_both_classes()?;
    let p = data.dim();
    let mut sums = [Array1::<f64>::zeros(p), Array1::<f64>::zeros(p)];
    for (row, label) in data.features().rows().into_iter().zip(data.labels()) {
        sums[label.index()] += &row;
    }
    let counts = data.counts();
    let n = (counts[0] + counts[1]) as f64;
    let overall_mean = (&sums[0] + &sums[1]) / n;
    let means = [
        &sums[0] / counts[0] as f64,
        &sums[1] / counts[1] as f64,
    ];
    let scale = ((counts[0] as f64) * (counts[1] as f64)).sqrt() / n;
    let d = (&means[0] - &means[1]) * scale;
    Ok(ClassStatistics {
        means,
        overall_mean,
        d,
        counts,
    })
}

/// `(1/n) sum_g sum_i (x_i - xbar_g)(x_i - xbar_g)^T`, accumulated as
/// `X^T X - sum_g n_g xbar_g xbar_g^T`.
pub fn within_class_covariance(data: &LabeledDataset, stats: &ClassStatistics) -> SymMatrix {
    let x = data.features();
    let mut scatter = x.t().dot(&x);
    for g in ClassLabel::BOTH {
        let mean = stats.mean(g);
        let ng = stats.count(g) as f64;
        let col = mean.view().insert_axis(Axis(1));
        let row = mean.view().insert_axis(Axis(0));
        scatter.scaled_add(-ng, &col.dot(&row));
    }
    scatter /= stats.total() as f64;
    SymMatrix::symmetrized(scatter).expect("square")
}

/// `(1/n_g) sum_i (x_i - xbar_g)(x_i - xbar_g)^T` for one class.
pub fn class_covariance(data: &LabeledDataset, stats: &ClassStatistics, g: ClassLabel) -> SymMatrix {
    let xg = data.class_matrix(g);
    let mean = stats.mean(g);
    let ng = stats.count(g) as f64;
    let mut scatter = xg.t().dot(&xg);
    let col = mean.view().insert_axis(Axis(1));
    let row = mean.view().insert_axis(Axis(0));
    scatter.scaled_add(-ng, &col.dot(&row));
    scatter /= ng;
    SymMatrix::symmetrized(scatter).expect("square")
}

/// `(1/m_g) sum_j (x_{j,c} - xbar_g)(x_{j,c} - xbar_g)^T`.
pub fn per_class_compressed_covariance(c: &CompressedClassData) -> SymMatrix {
    let dev = c.deviations();
    gram(dev.view()).scaled(1.0 / c.len() as f64)
}

/// `(1/m) sum_g sum_j (x_{j,c} - xbar_g)(x_{j,c} - xbar_g)^T` with
/// `m = m_1 + m_2`, centered at the full-data class means.
pub fn compressed_within_class_covariance(
    c1: &CompressedClassData,
    c2: &CompressedClassData,
    stats: &ClassStatistics,
) -> Result<SymMatrix> {
    let p = stats.overall_mean.len();
    for c in [c1, c2] {
        if c.samples().ncols() != p {
            return Err(Error::DimensionMismatch {
                what: "compressed sample dimension",
                expected: p,
                got: c.samples().ncols(),
            });
        }
    }
    let m = (c1.len() + c2.len()) as f64;
    let d1 = c1.deviations();
    let d2 = c2.deviations();
    let mut scatter = d1.t().dot(&d1);
    scatter += &d2.t().dot(&d2);
    scatter /= m;
    Ok(SymMatrix::symmetrized(scatter).expect("square"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinearVariant {
    Full,
    Compressed,
    Projected,
    Subsampled,
    Frf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuadraticVariant {
    Full,
    Compressed,
    Subsampled,
}

impl LinearVariant {
    pub fn name(self) -> &'static str {
        match self {
            LinearVariant::Full => "full-lda",
            LinearVariant::Compressed => "compressed-lda",
            LinearVariant::Projected => "projected-lda",
            LinearVariant::Subsampled => "subsampled-lda",
            LinearVariant::Frf => "frf",
        }
    }
}

impl QuadraticVariant {
    pub fn name(self) -> &'static str {
        match self {
            QuadraticVariant::Full => "full-qda",
            QuadraticVariant::Compressed => "compressed-qda",
            QuadraticVariant::Subsampled => "subsampled-qda",
        }
    }
}

impl fmt::Display for LinearVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for QuadraticVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LinearVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            LinearVariant::Full,
            LinearVariant::Compressed,
            LinearVariant::Projected,
            LinearVariant::Subsampled,
            LinearVariant::Frf,
        ]
        .into_iter()
        .find(|v| v.name() == s)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown linear method {s:?}")))
    }
}

impl FromStr for QuadraticVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            QuadraticVariant::Full,
            QuadraticVariant::Compressed,
            QuadraticVariant::Subsampled,
        ]
        .into_iter()
        .find(|v| v.name() == s)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown quadratic method {s:?}")))
    }
}

/// Settings shared by all fits. `m` and `s` are ignored by the full-data
/// variants, `s` by sub-sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub m: usize,
    pub s: f64,
    pub gamma: f64,
    pub family: MatrixFamily,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            m: 500,
            s: 0.01,
            gamma: 1e-4,
            family: MatrixFamily::SparseRademacher,
            seed: 0,
        }
    }
}

impl FitConfig {
    fn check_reduction(&self, n: usize) -> Result<()> {
        if self.m < 2 || self.m > n {
            return Err(Error::InvalidParameter(format!(
                "reduced sample size m must lie in [2, n = {n}], got {}",
                self.m
            )));
        }
        if !(self.gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "ridge must be non-negative, got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// Wall-clock split of a fit. `compress` covers drawing `Q`, forming the
/// compressed samples and their covariance (zero for full-data variants).
#[derive(Debug, Clone, Copy, Default)]
pub struct FitTimings {
    pub compress: Duration,
    pub total: Duration,
}

pub trait Classifier {
    fn dim(&self) -> usize;

    fn classify(&self, x: ArrayView1<f64>) -> Result<ClassLabel>;

    /// Labels for every row of `x`.
    fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<ClassLabel>> {
        x.rows().into_iter().map(|r| self.classify(r)).collect()
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch {
            what: "feature count",
            expected,
            got,
        });
    }
    Ok(())
}

#[inline]
fn argmin(scores: [f64; 2]) -> ClassLabel {
    if scores[0] <= scores[1] {
        ClassLabel::One
    } else {
        ClassLabel::Two
    }
}

/// A fitted linear discriminant rule.
#[derive(Debug, Clone)]
pub struct LinearModel {
    variant: LinearVariant,
    direction: Array1<f64>,
    covariance: Option<SymMatrix>,
    projected_means: [f64; 2],
    variance: f64,
    class_means: [Array1<f64>; 2],
    priors: [f64; 2],
    gamma: f64,
    m: usize,
    s: Option<f64>,
}

impl LinearModel {
    pub fn variant(&self) -> LinearVariant {
        self.variant
    }

    pub fn direction(&self) -> ArrayView1<'_, f64> {
        self.direction.view()
    }

    /// Within-class covariance the rule uses (without the ridge). `None` for
    /// Projected and FRF, which keep only the projected variance.
    pub fn covariance(&self) -> Option<&SymMatrix> {
        self.covariance.as_ref()
    }

    /// `beta^T xbar_g` for both classes.
    pub fn projected_means(&self) -> [f64; 2] {
        self.projected_means
    }

    /// Variance of the discriminant score used in the rule.
    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn class_mean(&self, g: ClassLabel) -> ArrayView1<'_, f64> {
        self.class_means[g.index()].view()
    }

    pub fn prior(&self, g: ClassLabel) -> f64 {
        self.priors[g.index()]
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Number of (compressed or retained) samples the covariance came from.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn sparsity(&self) -> Option<f64> {
        self.s
    }

    /// The same rule with `beta` replaced by `c beta`.
    pub fn with_scaled_direction(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.direction *= c;
        out.projected_means = [c * self.projected_means[0], c * self.projected_means[1]];
        out.variance *= c * c;
        out
    }

    /// The same rule with different class priors.
    pub fn with_priors(&self, prior1: f64) -> Self {
        let mut out = self.clone();
        out.priors = [prior1, 1.0 - prior1];
        out
    }

    #[inline]
    fn scores(&self, t: f64) -> [f64; 2] {
        let degenerate = self.variance == 0.0 || !self.variance.is_finite();
        let mut out = [0.0; 2];
        for g in 0..2 {
            let prior_term = -2.0 * self.priors[g].ln();
            out[g] = if degenerate {
                prior_term
            } else {
                let dz = t - self.projected_means[g];
                dz * dz / self.variance + prior_term
            };
        }
        out
    }
}

impl Classifier for LinearModel {
    fn dim(&self) -> usize {
        self.direction.len()
    }

    fn classify(&self, x: ArrayView1<f64>) -> Result<ClassLabel> {
        check_dim(self.dim(), x.len())?;
        Ok(argmin(self.scores(self.direction.dot(&x))))
    }

    fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<ClassLabel>> {
        check_dim(self.dim(), x.ncols())?;
        let t = x.dot(&self.direction);
        Ok(t.iter().map(|&t| argmin(self.scores(t))).collect())
    }
}

/// A fitted quadratic discriminant rule.
#[derive(Debug, Clone)]
pub struct QuadraticModel {
    variant: QuadraticVariant,
    covariances: [SymMatrix; 2],
    factors: [Cholesky; 2],
    logdets: [f64; 2],
    class_means: [Array1<f64>; 2],
    priors: [f64; 2],
    gamma: f64,
    m: usize,
}

impl QuadraticModel {
    pub fn variant(&self) -> QuadraticVariant {
        self.variant
    }

    pub fn covariance(&self, g: ClassLabel) -> &SymMatrix {
        &self.covariances[g.index()]
    }

    /// `log |S_g + gamma I|`.
    pub fn logdet(&self, g: ClassLabel) -> f64 {
        self.logdets[g.index()]
    }

    pub fn class_mean(&self, g: ClassLabel) -> ArrayView1<'_, f64> {
        self.class_means[g.index()].view()
    }

    pub fn prior(&self, g: ClassLabel) -> f64 {
        self.priors[g.index()]
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Builds the rule from explicit per-class covariances.
    pub fn from_parts(
        variant: QuadraticVariant,
        covariances: [SymMatrix; 2],
        class_means: [Array1<f64>; 2],
        priors: [f64; 2],
        gamma: f64,
        m: usize,
    ) -> Result<Self> {
        let p = class_means[0].len();
        for c in &covariances {
            check_dim(p, c.dim())?;
        }
        check_dim(p, class_means[1].len())?;
        let factors = [
            Cholesky::factor(&covariances[0], gamma)?,
            Cholesky::factor(&covariances[1], gamma)?,
        ];
        let logdets = [factors[0].logdet(), factors[1].logdet()];
        Ok(Self {
            variant,
            covariances,
            factors,
            logdets,
            class_means,
            priors,
            gamma,
            m,
        })
    }

    fn offsets(&self) -> [f64; 2] {
        [
            self.logdets[0] - 2.0 * self.priors[0].ln(),
            self.logdets[1] - 2.0 * self.priors[1].ln(),
        ]
    }
}

impl Classifier for QuadraticModel {
    fn dim(&self) -> usize {
        self.class_means[0].len()
    }

    fn classify(&self, x: ArrayView1<f64>) -> Result<ClassLabel> {
        check_dim(self.dim(), x.len())?;
        let off = self.offsets();
        let mut scores = [0.0; 2];
        for g in 0..2 {
            scores[g] = self.factors[g].mahalanobis_sq(x, self.class_means[g].view()) + off[g];
        }
        Ok(argmin(scores))
    }

    fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<ClassLabel>> {
        check_dim(self.dim(), x.ncols())?;
        let off = self.offsets();
        let mut scores = [Array1::<f64>::zeros(0), Array1::<f64>::zeros(0)];
        for g in 0..2 {
            // rows of (x - mean) L^{-T}
            let whitened = (&x - &self.class_means[g]).dot(&self.factors[g].inverse_lower().t());
            scores[g] = whitened.map_axis(Axis(1), |r| r.dot(&r)) + off[g];
        }
        Ok(scores[0]
            .iter()
            .zip(scores[1].iter())
            .map(|(&a, &b)| argmin([a, b]))
            .collect())
    }
}

/// Fraction of rows of `test` whose predicted label differs from the truth.
pub fn misclassification_rate<C: Classifier + ?Sized>(model: &C, test: &LabeledDataset) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::InvalidParameter("empty test set".into()));
    }
    let predicted = model.predict(test.features())?;
    let wrong = predicted
        .iter()
        .zip(test.labels())
        .filter(|(a, b)| a != b)
        .count();
    Ok(wrong as f64 / test.len() as f64)
}

/// Compresses the rows `rows` of `x` (the class-`g` samples, in order) with
/// `q`. Equivalent to [`crate::compression::compress_class`] on the selected
/// sub-matrix without materializing it.
fn compress_selected(
    label: ClassLabel,
    x: ArrayView2<f64>,
    rows: &[usize],
    mean: ArrayView1<f64>,
    q: &SparseCompressionMatrix,
) -> Result<CompressedClassData> {
    crate::compression::compress_rows(label, x, rows, mean, q)
}

fn class_seed(seed: u64, g: ClassLabel) -> u64 {
    child_seed(seed, &[u64::from(g.number())])
}

/// Draws `Q^1, Q^2` with `m_g` from [`split_compression_sizes`].
pub fn sample_class_matrices(
    stats: &ClassStatistics,
    config: &FitConfig,
) -> Result<[SparseCompressionMatrix; 2]> {
    let (m1, m2) = split_compression_sizes(
        stats.count(ClassLabel::One),
        stats.count(ClassLabel::Two),
        config.m,
    );
    let draw = |g: ClassLabel, m_g: usize| {
        SparseCompressionMatrix::sample(
            config.family,
            m_g,
            stats.count(g),
            config.s,
            class_seed(config.seed, g),
        )
    };
    Ok([draw(ClassLabel::One, m1)?, draw(ClassLabel::Two, m2)?])
}

/// Compresses both classes of `data` with the given matrices.
pub fn compress_classes(
    data: &LabeledDataset,
    stats: &ClassStatistics,
    matrices: [&SparseCompressionMatrix; 2],
) -> Result<[CompressedClassData; 2]> {
    let x = data.features();
    let c1 = compress_selected(
        ClassLabel::One,
        x,
        &data.class_indices(ClassLabel::One),
        stats.mean(ClassLabel::One),
        matrices[0],
    )?;
    let c2 = compress_selected(
        ClassLabel::Two,
        x,
        &data.class_indices(ClassLabel::Two),
        stats.mean(ClassLabel::Two),
        matrices[1],
    )?;
    Ok([c1, c2])
}

fn priors(stats: &ClassStatistics) -> [f64; 2] {
    [stats.prior(ClassLabel::One), stats.prior(ClassLabel::Two)]
}

/// Rule that uses `covariance` both for `beta` and for the score variance.
fn plug_in_linear(
    variant: LinearVariant,
    stats: &ClassStatistics,
    covariance: SymMatrix,
    gamma: f64,
    m: usize,
    s: Option<f64>,
) -> Result<LinearModel> {
    let chol = Cholesky::factor(&covariance, gamma)?;
    let beta = chol.solve(stats.d())?;
    // beta^T (S + gI) beta = beta^T d
    let variance = {
        let y = chol.lower().t().dot(&beta);
        y.dot(&y)
    };
    let class_means = [
        stats.mean(ClassLabel::One).to_owned(),
        stats.mean(ClassLabel::Two).to_owned(),
    ];
    Ok(LinearModel {
        variant,
        projected_means: [beta.dot(&class_means[0]), beta.dot(&class_means[1])],
        direction: beta,
        covariance: Some(covariance),
        variance,
        class_means,
        priors: priors(stats),
        gamma,
        m,
        s,
    })
}

/// One-dimensional LDA on `z_i = beta^T x_i` over the full training data.
fn projected_linear(
    variant: LinearVariant,
    data: &LabeledDataset,
    stats: &ClassStatistics,
    beta: Array1<f64>,
    gamma: f64,
    m: usize,
    s: Option<f64>,
) -> LinearModel {
    let z = data.features().dot(&beta);
    let mut sums = [0.0; 2];
    for (&zi, l) in z.iter().zip(data.labels()) {
        sums[l.index()] += zi;
    }
    let zbar = [
        sums[0] / stats.count(ClassLabel::One) as f64,
        sums[1] / stats.count(ClassLabel::Two) as f64,
    ];
    let ss: f64 = z
        .iter()
        .zip(data.labels())
        .map(|(&zi, l)| (zi - zbar[l.index()]).powi(2))
        .sum();
    LinearModel {
        variant,
        direction: beta,
        covariance: None,
        projected_means: zbar,
        variance: ss / stats.total() as f64,
        class_means: [
            stats.mean(ClassLabel::One).to_owned(),
            stats.mean(ClassLabel::Two).to_owned(),
        ],
        priors: priors(stats),
        gamma,
        m,
        s,
    }
}

/// Compressed or Projected LDA from explicit compression matrices.
pub fn fit_linear_from_matrices(
    data: &LabeledDataset,
    variant: LinearVariant,
    matrices: [&SparseCompressionMatrix; 2],
    gamma: f64,
) -> Result<LinearModel> {
    let stats = class_statistics(data)?;
    let [c1, c2] = compress_classes(data, &stats, matrices)?;
    let s_wc = compressed_within_class_covariance(&c1, &c2, &stats)?;
    linear_from_compressed(data, &stats, variant, s_wc, c1.len() + c2.len(), matrices[0].sparsity(), gamma)
}

fn linear_from_compressed(
    data: &LabeledDataset,
    stats: &ClassStatistics,
    variant: LinearVariant,
    s_wc: SymMatrix,
    m: usize,
    s: f64,
    gamma: f64,
) -> Result<LinearModel> {
    match variant {
        LinearVariant::Compressed => plug_in_linear(variant, stats, s_wc, gamma, m, Some(s)),
        LinearVariant::Projected => {
            let beta = ridge_solve(&s_wc, gamma, stats.d())?;
            Ok(projected_linear(variant, data, stats, beta, gamma, m, Some(s)))
        }
        other => Err(Error::InvalidParameter(format!(
            "{other} is not built from class-wise compression"
        ))),
    }
}

/// Stratified sub-sample with `m_g` rows per class.
pub fn stratified_subsample(
    data: &LabeledDataset,
    m: usize,
    seed: u64,
) -> Result<LabeledDataset> {
    let [n1, n2] = data.counts();
    let (m1, m2) = split_compression_sizes(n1, n2, m);
    let mut rows = Vec::with_capacity(m1 + m2);
    for (g, k) in [(ClassLabel::One, m1), (ClassLabel::Two, m2)] {
        let mut rng = rng_from_seed(class_seed(seed, g));
        rows.extend(sample_class_rows(data, g, k, &mut rng));
    }
    rows.sort_unstable();
    data.subset(&rows, format!("{} [subsample m={m}]", data.provenance()))
}

pub fn fit_linear(data: &LabeledDataset, variant: LinearVariant, config: &FitConfig) -> Result<LinearModel> {
    fit_linear_timed(data, variant, config).map(|(m, _)| m)
}

pub fn fit_linear_timed(
    data: &LabeledDataset,
    variant: LinearVariant,
    config: &FitConfig,
) -> Result<(LinearModel, FitTimings)> {
    let start = Instant::now();
    let stats = class_statistics(data)?;
    let n = stats.total();
    let mut compress = Duration::ZERO;
    let model = match variant {
        LinearVariant::Full => {
            let s_w = within_class_covariance(data, &stats);
            plug_in_linear(variant, &stats, s_w, config.gamma, n, None)?
        }
        LinearVariant::Compressed | LinearVariant::Projected => {
            config.check_reduction(n)?;
            let t0 = Instant::now();
            let q = sample_class_matrices(&stats, config)?;
            let [c1, c2] = compress_classes(data, &stats, [&q[0], &q[1]])?;
            let s_wc = compressed_within_class_covariance(&c1, &c2, &stats)?;
            compress = t0.elapsed();
            linear_from_compressed(
                data,
                &stats,
                variant,
                s_wc,
                c1.len() + c2.len(),
                q[0].sparsity(),
                config.gamma,
            )?
        }
        LinearVariant::Subsampled => {
            config.check_reduction(n)?;
            let t0 = Instant::now();
            let sub = stratified_subsample(data, config.m, config.seed)?;
            let sub_stats = class_statistics(&sub)?;
            let s_w = within_class_covariance(&sub, &sub_stats);
            compress = t0.elapsed();
            plug_in_linear(variant, &sub_stats, s_w, config.gamma, sub.len(), None)?
        }
        LinearVariant::Frf => {
            config.check_reduction(n)?;
            let t0 = Instant::now();
            let q = SparseCompressionMatrix::sample(
                config.family,
                config.m,
                n,
                config.s,
                child_seed(config.seed, &[0]),
            )?;
            let all: Vec<usize> = (0..n).collect();
            let joint = compress_selected(
                ClassLabel::One,
                data.features(),
                &all,
                stats.overall_mean(),
                &q,
            )?;
            let s_joint = per_class_compressed_covariance(&joint);
            compress = t0.elapsed();
            let beta = ridge_solve(&s_joint, config.gamma, stats.d())?;
            projected_linear(variant, data, &stats, beta, config.gamma, config.m, Some(q.sparsity()))
        }
    };
    Ok((
        model,
        FitTimings {
            compress,
            total: start.elapsed(),
        },
    ))
}

pub fn fit_quadratic(
    data: &LabeledDataset,
    variant: QuadraticVariant,
    config: &FitConfig,
) -> Result<QuadraticModel> {
    fit_quadratic_timed(data, variant, config).map(|(m, _)| m)
}

fn full_quadratic(
    variant: QuadraticVariant,
    data: &LabeledDataset,
    gamma: f64,
) -> Result<QuadraticModel> {
    let stats = class_statistics(data)?;
    let covs = [
        class_covariance(data, &stats, ClassLabel::One),
        class_covariance(data, &stats, ClassLabel::Two),
    ];
    QuadraticModel::from_parts(
        variant,
        covs,
        [
            stats.mean(ClassLabel::One).to_owned(),
            stats.mean(ClassLabel::Two).to_owned(),
        ],
        priors(&stats),
        gamma,
        stats.total(),
    )
}

/// Compressed QDA from explicit compression matrices.
pub fn fit_quadratic_from_matrices(
    data: &LabeledDataset,
    matrices: [&SparseCompressionMatrix; 2],
    gamma: f64,
) -> Result<QuadraticModel> {
    let stats = class_statistics(data)?;
    let [c1, c2] = compress_classes(data, &stats, matrices)?;
    compressed_quadratic(&stats, &c1, &c2, gamma)
}

fn compressed_quadratic(
    stats: &ClassStatistics,
    c1: &CompressedClassData,
    c2: &CompressedClassData,
    gamma: f64,
) -> Result<QuadraticModel> {
    QuadraticModel::from_parts(
        QuadraticVariant::Compressed,
        [
            per_class_compressed_covariance(c1),
            per_class_compressed_covariance(c2),
        ],
        [
            stats.mean(ClassLabel::One).to_owned(),
            stats.mean(ClassLabel::Two).to_owned(),
        ],
        priors(stats),
        gamma,
        c1.len() + c2.len(),
    )
}

pub fn fit_quadratic_timed(
    data: &LabeledDataset,
    variant: QuadraticVariant,
    config: &FitConfig,
) -> Result<(QuadraticModel, FitTimings)> {
    let start = Instant::now();
    let mut compress = Duration::ZERO;
    let model = match variant {
        QuadraticVariant::Full => full_quadratic(variant, data, config.gamma)?,
        QuadraticVariant::Compressed => {
            let stats = class_statistics(data)?;
            config.check_reduction(stats.total())?;
            let t0 = Instant::now();
            let q = sample_class_matrices(&stats, config)?;
            let [c1, c2] = compress_classes(data, &stats, [&q[0], &q[1]])?;
            compress = t0.elapsed();
            compressed_quadratic(&stats, &c1, &c2, config.gamma)?
        }
        QuadraticVariant::Subsampled => {
            data.require_both_classes()?;
            config.check_reduction(data.len())?;
            let t0 = Instant::now();
            let sub = stratified_subsample(data, config.m, config.seed)?;
            compress = t0.elapsed();
            full_quadratic(variant, &sub, config.gamma)?
        }
    };
    Ok((
        model,
        FitTimings {
            compress,
            total: start.elapsed(),
        },
    ))
}

/// `Q^g` as the identity permutation with `s = 1/n_g`, so that every
/// compressed sample equals an original one.
pub fn identity_matrices(stats: &ClassStatistics) -> Result<[SparseCompressionMatrix; 2]> {
    let make = |g: ClassLabel| {
        let n_g = stats.count(g);
        let triplets = (0..n_g)
            .map(|i| crate::compression::Triplet {
                row: i,
                col: i,
                value: 1.0,
            })
            .collect();
        SparseCompressionMatrix::from_triplets(
            MatrixFamily::SparseRademacher,
            n_g,
            n_g,
            1.0 / n_g as f64,
            triplets,
        )
    };
    Ok([make(ClassLabel::One)?, make(ClassLabel::Two)?])
}

/// Compressed samples stacked into one matrix (class 1 first), for PCA
/// dumps.
pub fn stack_compressed(c1: &CompressedClassData, c2: &CompressedClassData) -> Array2<f64> {
    ndarray::concatenate(Axis(0), &[c1.samples(), c2.samples()]).expect("same width")
}
