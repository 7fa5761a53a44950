//! Sparse random compression matrices and class-wise compressed samples.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::datasets::ClassLabel;
use crate::rng::rng_from_seed;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum MatrixFamily {
    /// Entries 0 w.p. `1 - s`, `+1` / `-1` w.p. `s / 2` each.
    #[default]
    SparseRademacher,
    /// Entries nonzero w.p. `s`, standard normal when nonzero.
    SparseGaussian,
    /// One `+-1` per column in a uniformly chosen row.
    CountSketch,
}

impl MatrixFamily {
    pub fn name(self) -> &'static str {
        match self {
            MatrixFamily::SparseRademacher => "rademacher",
            MatrixFamily::SparseGaussian => "gaussian",
            MatrixFamily::CountSketch => "countsketch",
        }
    }
}

impl fmt::Display for MatrixFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MatrixFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rademacher" | "sparse-rademacher" => Ok(MatrixFamily::SparseRademacher),
            "gaussian" | "sparse-gaussian" => Ok(MatrixFamily::SparseGaussian),
            "countsketch" | "count-sketch" => Ok(MatrixFamily::CountSketch),
            other => Err(Error::InvalidParameter(format!(
                "unknown matrix family {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triplet {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// An `m_g x n_g` sparse random matrix in triplet form, sorted by
/// `(row, col)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCompressionMatrix {
    rows: usize,
    cols: usize,
    sparsity: f64,
    family: MatrixFamily,
    seed: u64,
    triplets: Vec<Triplet>,
    row_starts: Vec<usize>,
}

fn check_sparsity(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidSparsity(s))
    }
}

impl SparseCompressionMatrix {
    /// Draws a matrix from `family`. `s` is ignored for
    /// [`MatrixFamily::CountSketch`]. Identical arguments give identical
    /// matrices.
    pub fn sample(
        family: MatrixFamily,
        rows: usize,
        cols: usize,
        s: f64,
        seed: u64,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(format!(
                "compression matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        let mut rng = rng_from_seed(seed);
        let triplets = match family {
            MatrixFamily::SparseRademacher | MatrixFamily::SparseGaussian => {
                check_sparsity(s)?;
                // Gaps between consecutive nonzeros (row-major) are
                // Geometric(s): the law of i.i.d. Bernoulli(s) entries at
                // O(nnz) cost, produced already sorted.
                let total = rows as u64 * cols as u64;
                // inverse transform: floor(ln U / ln(1 - s)), U uniform on (0, 1]
                let inv_log = 1.0 / (-s).ln_1p();
                let gap = |rng: &mut crate::rng::Rng| -> u64 {
                    let u = 1.0 - rng.random::<f64>();
                    (u.ln() * inv_log) as u64
                };
                let mut out = Vec::with_capacity((total as f64 * s * 1.05) as usize + 16);
                let mut pos = gap(&mut rng);
                while pos < total {
                    let value = match family {
                        MatrixFamily::SparseRademacher => {
                            if rng.random::<bool>() {
                                1.0
                            } else {
                                -1.0
                            }
                        }
                        _ => StandardNormal.sample(&mut rng),
                    };
                    out.push(Triplet {
                        row: (pos / cols as u64) as usize,
                        col: (pos % cols as u64) as usize,
                        value,
                    });
                    pos = pos.saturating_add(1).saturating_add(gap(&mut rng));
                }
                out
            }
            MatrixFamily::CountSketch => {
                let mut t: Vec<Triplet> = (0..cols)
                    .map(|col| {
                        let row = rng.random_range(0..rows);
                        let value = if rng.random::<bool>() { 1.0 } else { -1.0 };
                        Triplet { row, col, value }
                    })
                    .collect();
                t.sort_unstable_by_key(|t| (t.row, t.col));
                t
            }
        };
        let sparsity = match family {
            MatrixFamily::CountSketch => 1.0 / rows as f64,
            _ => s,
        };
        Ok(Self::assemble(rows, cols, sparsity, family, seed, triplets))
    }

    /// Builds a matrix from explicit triplets (any order). Used for
    /// deterministic constructions and tests.
    pub fn from_triplets(
        family: MatrixFamily,
        rows: usize,
        cols: usize,
        s: f64,
        mut triplets: Vec<Triplet>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(format!(
                "compression matrix must be non-empty, got {rows}x{cols}"
            )));
        }
        check_sparsity(s).or_else(|e| {
            // s == 1 is allowed for hand-built matrices: it only sets the scale.
            if s == 1.0 {
                Ok(())
            } else {
                Err(e)
            }
        })?;
        for t in &triplets {
            if t.row >= rows || t.col >= cols {
                return Err(Error::InvalidParameter(format!(
                    "triplet ({}, {}) outside {rows}x{cols}",
                    t.row, t.col
                )));
            }
            if !t.value.is_finite() {
                return Err(Error::InvalidParameter("non-finite triplet value".into()));
            }
        }
        triplets.sort_unstable_by(|a, b| {
            (a.row, a.col)
                .cmp(&(b.row, b.col))
                .then(a.value.total_cmp(&b.value))
        });
        if triplets
            .windows(2)
            .any(|w| (w[0].row, w[0].col) == (w[1].row, w[1].col))
        {
            return Err(Error::InvalidParameter("duplicate triplet position".into()));
        }
        Ok(Self::assemble(rows, cols, s, family, 0, triplets))
    }

    fn assemble(
        rows: usize,
        cols: usize,
        sparsity: f64,
        family: MatrixFamily,
        seed: u64,
        triplets: Vec<Triplet>,
    ) -> Self {
        let mut row_starts = vec![0usize; rows + 1];
        for t in &triplets {
            row_starts[t.row + 1] += 1;
        }
        for j in 0..rows {
            row_starts[j + 1] += row_starts[j];
        }
        Self {
            rows,
            cols,
            sparsity,
            family,
            seed,
            triplets,
            row_starts,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Probability of a nonzero entry; `1 / rows` for count sketch.
    pub fn sparsity(&self) -> f64 {
        self.sparsity
    }

    pub fn family(&self) -> MatrixFamily {
        self.family
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn triplets(&self) -> &[Triplet] {
        &self.triplets
    }

    pub fn nnz(&self) -> usize {
        self.triplets.len()
    }

    /// Nonzeros of row `j`, in ascending column order.
    pub fn row(&self, j: usize) -> &[Triplet] {
        &self.triplets[self.row_starts[j]..self.row_starts[j + 1]]
    }

    /// Factor `(n_g s)^{-1/2}` with `E[Q_{j,i}^2] = s`, which makes the
    /// compressed covariance unbiased for the class sample covariance.
    pub fn scale(&self) -> f64 {
        1.0 / (self.cols as f64 * self.sparsity).sqrt()
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut d = Array2::zeros((self.rows, self.cols));
        for t in &self.triplets {
            d[[t.row, t.col]] = t.value;
        }
        d
    }
}

/// Compressed samples of one class.
#[derive(Debug, Clone)]
pub struct CompressedClassData {
    label: ClassLabel,
    samples: Array2<f64>,
    class_mean: Array1<f64>,
    sparsity: f64,
}

impl CompressedClassData {
    pub fn label(&self) -> ClassLabel {
        self.label
    }

    /// `m_g x p` compressed samples.
    pub fn samples(&self) -> ArrayView2<'_, f64> {
        self.samples.view()
    }

    pub fn class_mean(&self) -> ArrayView1<'_, f64> {
        self.class_mean.view()
    }

    pub fn sparsity(&self) -> f64 {
        self.sparsity
    }

    pub fn len(&self) -> usize {
        self.samples.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.nrows() == 0
    }

    /// Samples minus the full-data class mean.
    pub fn deviations(&self) -> Array2<f64> {
        &self.samples - &self.class_mean
    }
}

/// Row `j` of the result is
/// `scale * sum_i Q_{j,i} (x_i - mean) + mean`, summed over the nonzeros of
/// row `j` in ascending column order.
pub fn compress_class(
    label: ClassLabel,
    x: ArrayView2<f64>,
    class_mean: ArrayView1<f64>,
    q: &SparseCompressionMatrix,
) -> Result<CompressedClassData> {
    let rows: Vec<usize> = (0..x.nrows()).collect();
    compress_rows(label, x, &rows, class_mean, q)
}

/// Like [`compress_class`] but column `i` of `q` refers to `x.row(rows[i])`,
/// so a class can be compressed without copying it out of the full matrix.
pub(crate) fn compress_rows(
    label: ClassLabel,
    x: ArrayView2<f64>,
    rows: &[usize],
    class_mean: ArrayView1<f64>,
    q: &SparseCompressionMatrix,
) -> Result<CompressedClassData> {
    let p = x.ncols();
    if q.cols() != rows.len() {
        return Err(Error::DimensionMismatch {
            what: "compression matrix columns vs class size",
            expected: rows.len(),
            got: q.cols(),
        });
    }
    if class_mean.len() != p {
        return Err(Error::DimensionMismatch {
            what: "class mean length",
            expected: p,
            got: class_mean.len(),
        });
    }
    let x = x.as_standard_layout();
    let x = x.as_slice().expect("standard layout");
    let mean = class_mean.to_vec();
    let scale = q.scale();
    let m_g = q.rows();

    // Visit Q column by column: each source row is read once and its
    // deviation reused for every compressed row it feeds. Within a column the
    // rows ascend, so each output row still sums its terms in ascending
    // source order.
    let by_col = column_order(q);
    let mut acc = vec![0.0; m_g * p];
    let mut dev = vec![0.0; p];
    let mut current = usize::MAX;
    for t in &by_col {
        if t.col != current {
            current = t.col;
            let src = rows[t.col] * p;
            for ((d, &v), &mu) in dev.iter_mut().zip(&x[src..src + p]).zip(&mean) {
                *d = v - mu;
            }
        }
        let dst = t.row * p;
        for (a, &d) in acc[dst..dst + p].iter_mut().zip(&dev) {
            *a += t.value * d;
        }
    }
    for (a, &mu) in acc.iter_mut().zip(mean.iter().cycle()) {
        *a = scale * *a + mu;
    }
    let samples = Array2::from_shape_vec((m_g, p), acc).expect("m_g * p accumulators");
    Ok(CompressedClassData {
        label,
        samples,
        class_mean: class_mean.to_owned(),
        sparsity: q.sparsity(),
    })
}

/// Triplets reordered by `(col, row)` with a counting sort.
fn column_order(q: &SparseCompressionMatrix) -> Vec<Triplet> {
    let mut starts = vec![0usize; q.cols() + 1];
    for t in q.triplets() {
        starts[t.col + 1] += 1;
    }
    for i in 0..q.cols() {
        starts[i + 1] += starts[i];
    }
    let mut out = vec![
        Triplet {
            row: 0,
            col: 0,
            value: 0.0
        };
        q.nnz()
    ];
    for t in q.triplets() {
        out[starts[t.col]] = *t;
        starts[t.col] += 1;
    }
    out
}

/// `m_g = floor(n_g m / n)`, each raised to at least 1. The remainder is not
/// redistributed, so `m_1 + m_2` may fall short of `m`.
pub fn split_compression_sizes(n1: usize, n2: usize, m: usize) -> (usize, usize) {
    let n = (n1 + n2) as u128;
    let share = |n_g: usize| -> usize {
        if n == 0 {
            return 1;
        }
        ((n_g as u128 * m as u128 / n) as usize).max(1)
    };
    (share(n1), share(n2))
}
