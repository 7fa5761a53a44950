//! Two-component PCA of raw or compressed training samples, for plotting.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use compda::compression::split_compression_sizes;
use compda::discriminant::{class_statistics, compress_classes, stack_compressed};
use compda::linalg::pca_top2;
use compda::rng::rng_from_seed;
use compda::{ClassLabel, LabeledDataset, MatrixFamily, SparseCompressionMatrix};
use compda::rng::child_seed;
use ndarray::Axis;
use rand::seq::index;

use crate::error::{BenchError, Context, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcaMode {
    Raw,
    Compressed,
}

impl fmt::Display for PcaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PcaMode::Raw => "raw",
            PcaMode::Compressed => "compressed",
        })
    }
}

impl FromStr for PcaMode {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(PcaMode::Raw),
            "compressed" => Ok(PcaMode::Compressed),
            other => Err(BenchError::config(format!("unknown pca mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcaPoint {
    pub pc1: f64,
    pub pc2: f64,
    pub label: ClassLabel,
}

/// Per-class compressed sizes summing to exactly `k`: the floor split, with
/// any remainder given to the larger class.
pub fn exact_class_sizes(n1: usize, n2: usize, k: usize) -> (usize, usize) {
    let (m1, m2) = split_compression_sizes(n1, n2, k);
    let short = k.saturating_sub(m1 + m2);
    if n1 >= n2 {
        (m1 + short, m2)
    } else {
        (m1, m2 + short)
    }
}

/// Projects `k` samples onto their first two principal components. Raw mode
/// draws `k` training rows uniformly without replacement; compressed mode
/// builds `k` compressed samples from the whole training set.
pub fn pca_points(
    data: &LabeledDataset,
    k: usize,
    mode: PcaMode,
    s: f64,
    family: MatrixFamily,
    seed: u64,
) -> Result<Vec<PcaPoint>> {
    if k < 2 {
        return Err(BenchError::config(format!("pca needs at least 2 samples, got {k}")));
    }
    let (x, labels) = match mode {
        PcaMode::Raw => {
            if k > data.len() {
                return Err(BenchError::config(format!(
                    "k = {k} exceeds the {} available samples",
                    data.len()
                )));
            }
            let mut rng = rng_from_seed(seed);
            let mut rows = index::sample(&mut rng, data.len(), k).into_vec();
            rows.sort_unstable();
            let labels = rows.iter().map(|&i| data.labels()[i]).collect::<Vec<_>>();
            (data.features().select(Axis(0), &rows), labels)
        }
        PcaMode::Compressed => {
            let stats = class_statistics(data).context(|| "pca class statistics".into())?;
            let [n1, n2] = data.counts();
            let (m1, m2) = exact_class_sizes(n1, n2, k);
            let draw = |g: ClassLabel, rows: usize, cols: usize| {
                SparseCompressionMatrix::sample(
                    family,
                    rows,
                    cols,
                    s,
                    child_seed(seed, &[u64::from(g.number())]),
                )
                .context(|| format!("sampling compression matrix for class {}", g.number()))
            };
            let q1 = draw(ClassLabel::One, m1, n1)?;
            let q2 = draw(ClassLabel::Two, m2, n2)?;
            let [c1, c2] =
                compress_classes(data, &stats, [&q1, &q2]).context(|| "compressing".into())?;
            let mut labels = vec![ClassLabel::One; c1.len()];
            labels.extend(std::iter::repeat_n(ClassLabel::Two, c2.len()));
            (stack_compressed(&c1, &c2), labels)
        }
    };
    let proj = pca_top2(x.view()).context(|| "principal components".into())?;
    Ok(proj
        .rows()
        .into_iter()
        .zip(labels)
        .map(|(r, label)| PcaPoint {
            pc1: r[0],
            pc2: r[1],
            label,
        })
        .collect())
}

/// Writes `pc1,pc2,class` rows; returns the number of points.
pub fn write_pca(points: &[PcaPoint], path: &Path) -> Result<usize> {
    let mut w = csv::Writer::from_path(path).map_err(|e| BenchError::Output {
        path: path.to_owned(),
        reason: e.to_string(),
    })?;
    let out_err = |e: csv::Error| BenchError::Output {
        path: path.to_owned(),
        reason: e.to_string(),
    };
    w.write_record(["pc1", "pc2", "class"]).map_err(out_err)?;
    for p in points {
        w.write_record([p.pc1.to_string(), p.pc2.to_string(), p.label.number().to_string()])
            .map_err(out_err)?;
    }
    w.flush().map_err(|e| BenchError::Io {
        path: path.to_owned(),
        source: e,
    })?;
    Ok(points.len())
}

pub fn dump_pca(
    data: &LabeledDataset,
    k: usize,
    mode: PcaMode,
    s: f64,
    family: MatrixFamily,
    seed: u64,
    out: &Path,
) -> Result<usize> {
    let points = pca_points(data, k, mode, s, family, seed)?;
    write_pca(&points, out)
}
