//! Labeled two-class datasets: file loaders, splits and synthetic generators.
//!
//! Supported inputs:
//! - IDX (MNIST): big-endian magic `0x00000803` for images, `0x00000801` for
//!   labels; pixels are scaled by `1/255`.
//! - USPS / Zip Code text: `label v_1 ... v_256` per line, whitespace separated.
//! - Skin Segmentation: `B\tG\tR\tlabel`, label 1 = skin, 2 = not skin.
//! - Generic CSV with a header and a binary label column.

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::index;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::linalg::{Cholesky, SymMatrix};
use crate::rng::{child_seed, rng_from_seed};
use crate::theory::{PopulationCovariance, PopulationModel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassLabel {
    One,
    Two,
}

impl ClassLabel {
    pub const BOTH: [ClassLabel; 2] = [ClassLabel::One, ClassLabel::Two];

    /// 0 for class 1, 1 for class 2.
    pub fn index(self) -> usize {
        match self {
            ClassLabel::One => 0,
            ClassLabel::Two => 1,
        }
    }

    /// 1 or 2.
    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }

    pub fn from_number(g: u8) -> Option<Self> {
        match g {
            1 => Some(ClassLabel::One),
            2 => Some(ClassLabel::Two),
            _ => None,
        }
    }
}

/// `n x p` features with labels in `{1, 2}`.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    features: Array2<f64>,
    labels: Vec<ClassLabel>,
    counts: [usize; 2],
    provenance: String,
}

impl LabeledDataset {
    /// Validates finiteness and label count. Either class may be empty here;
    /// fitting and splitting check that separately.
    pub fn new(
        features: Array2<f64>,
        labels: Vec<ClassLabel>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if labels.len() != features.nrows() {
            return Err(Error::DimensionMismatch {
                what: "label count",
                expected: features.nrows(),
                got: labels.len(),
            });
        }
        if let Some(((row, col), _)) = features.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { row, col });
        }
        let mut counts = [0usize; 2];
        for l in &labels {
            counts[l.index()] += 1;
        }
        Ok(Self {
            features,
            labels,
            counts,
            provenance: provenance.into(),
        })
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn labels(&self) -> &[ClassLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn count(&self, g: ClassLabel) -> usize {
        self.counts[g.index()]
    }

    pub fn counts(&self) -> [usize; 2] {
        self.counts
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.features.row(i)
    }

    pub fn fraction(&self, g: ClassLabel) -> f64 {
        self.count(g) as f64 / self.len() as f64
    }

    /// Row indices of class `g`, ascending.
    pub fn class_indices(&self, g: ClassLabel) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == g)
            .map(|(i, _)| i)
            .collect()
    }

    /// `n_g x p` matrix of class `g` rows.
    pub fn class_matrix(&self, g: ClassLabel) -> Array2<f64> {
        self.features.select(Axis(0), &self.class_indices(g))
    }

    /// Rows at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize], provenance: impl Into<String>) -> Result<Self> {
        let features = self.features.select(Axis(0), indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Self::new(features, labels, provenance)
    }

    pub(crate) fn require_both_classes(&self) -> Result<()> {
        for g in ClassLabel::BOTH {
            if self.count(g) == 0 {
                return Err(Error::EmptyClass(g.number()));
            }
        }
        Ok(())
    }
}

/// Ten-class digit images before merging into two classes.
#[derive(Debug, Clone)]
pub struct DigitDataset {
    pub features: Array2<f64>,
    pub digits: Vec<u8>,
    pub provenance: String,
}

impl DigitDataset {
    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn be_u32(bytes: &[u8], offset: usize, path: &Path) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::TruncatedFile {
            path: path.to_owned(),
            needed: offset + 4,
            have: bytes.len(),
        })
}

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// Parses an IDX image file and its label file.
pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<DigitDataset> {
    let (ip, lp) = (images_path.as_ref(), labels_path.as_ref());
    let images = read_bytes(ip)?;
    let labels = read_bytes(lp)?;

    let magic = be_u32(&images, 0, ip)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::BadMagic {
            path: ip.to_owned(),
            expected: IDX_IMAGES_MAGIC,
            found: magic,
        });
    }
    let count = be_u32(&images, 4, ip)? as usize;
    let rows = be_u32(&images, 8, ip)? as usize;
    let cols = be_u32(&images, 12, ip)? as usize;
    let p = rows * cols;
    let needed = 16 + count * p;
    if images.len() < needed {
        return Err(Error::TruncatedFile {
            path: ip.to_owned(),
            needed,
            have: images.len(),
        });
    }

    let magic = be_u32(&labels, 0, lp)?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::BadMagic {
            path: lp.to_owned(),
            expected: IDX_LABELS_MAGIC,
            found: magic,
        });
    }
    let label_count = be_u32(&labels, 4, lp)? as usize;
    if label_count != count {
        return Err(Error::CountMismatch {
            images: count,
            labels: label_count,
        });
    }
    if labels.len() < 8 + label_count {
        return Err(Error::TruncatedFile {
            path: lp.to_owned(),
            needed: 8 + label_count,
            have: labels.len(),
        });
    }

    let pixels = &images[16..needed];
    let features = Array2::from_shape_fn((count, p), |(i, j)| f64::from(pixels[i * p + j]) / 255.0);
    Ok(DigitDataset {
        features,
        digits: labels[8..8 + count].to_vec(),
        provenance: ip.display().to_string(),
    })
}

/// Parses the USPS (Zip Code) text format: a digit label followed by 256
/// values per line.
pub fn load_usps(path: impl AsRef<Path>) -> Result<DigitDataset> {
    const P: usize = 256;
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::new();
    let mut digits = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != P + 1 {
            return Err(Error::MalformedLine {
                path: path.to_owned(),
                line: lineno + 1,
                reason: format!("expected {} fields, found {}", P + 1, fields.len()),
            });
        }
        let label: f64 = fields[0].parse().map_err(|_| Error::NonDigitLabel {
            path: path.to_owned(),
            line: lineno + 1,
            label: fields[0].to_owned(),
        })?;
        if label.fract() != 0.0 || !(0.0..=9.0).contains(&label) {
            return Err(Error::NonDigitLabel {
                path: path.to_owned(),
                line: lineno + 1,
                label: fields[0].to_owned(),
            });
        }
        digits.push(label as u8);
        for f in &fields[1..] {
            let v: f64 = f.parse().map_err(|_| Error::MalformedLine {
                path: path.to_owned(),
                line: lineno + 1,
                reason: format!("not a number: {f:?}"),
            })?;
            values.push(v);
        }
    }
    let n = digits.len();
    let features = Array2::from_shape_vec((n, P), values).expect("row lengths checked");
    Ok(DigitDataset {
        features,
        digits,
        provenance: path.display().to_string(),
    })
}

/// Parses the Skin Segmentation file (`B G R label`, tab separated).
pub fn load_skin(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::MalformedLine {
                path: path.to_owned(),
                line: lineno + 1,
                reason: format!("expected 4 fields, found {}", fields.len()),
            });
        }
        for f in &fields[..3] {
            let v: f64 = f.parse().map_err(|_| Error::MalformedLine {
                path: path.to_owned(),
                line: lineno + 1,
                reason: format!("not a number: {f:?}"),
            })?;
            values.push(v);
        }
        let label = fields[3]
            .parse::<u8>()
            .ok()
            .and_then(ClassLabel::from_number)
            .ok_or_else(|| Error::UnknownLabel {
                path: path.to_owned(),
                line: lineno + 1,
                label: fields[3].to_owned(),
            })?;
        labels.push(label);
    }
    let features = Array2::from_shape_vec((labels.len(), 3), values).expect("row lengths checked");
    LabeledDataset::new(features, labels, path.display().to_string())
}

/// Reads a CSV with a header row. Column `label_column` (name or 0-based
/// index) holds the class; rows equal to `positive_label` become class 1,
/// the rest class 2. All other columns are numeric features.
pub fn load_csv_labeled(
    path: impl AsRef<Path>,
    label_column: &str,
    positive_label: &str,
) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let malformed = |reason: String| Error::MalformedCsv {
        path: path.to_owned(),
        reason,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| malformed(e.to_string()))?;
    let headers = reader.headers().map_err(|e| malformed(e.to_string()))?.clone();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .or_else(|| label_column.parse::<usize>().ok().filter(|&i| i < headers.len()))
        .ok_or_else(|| malformed(format!("no label column {label_column:?}")))?;

    let mut values = Vec::new();
    let mut raw_labels = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| malformed(e.to_string()))?;
        for (j, field) in record.iter().enumerate() {
            if j == label_idx {
                raw_labels.push(field.to_owned());
            } else {
                let v: f64 = field
                    .parse()
                    .map_err(|_| malformed(format!("row {}: not a number: {field:?}", row + 2)))?;
                values.push(v);
            }
        }
    }
    let mut distinct: Vec<&str> = raw_labels.iter().map(String::as_str).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() > 2 || (distinct.len() == 2 && !distinct.contains(&positive_label)) {
        return Err(Error::NonBinaryLabels(distinct.len()));
    }
    let p = headers.len() - 1;
    let labels: Vec<ClassLabel> = raw_labels
        .iter()
        .map(|l| {
            if l == positive_label {
                ClassLabel::One
            } else {
                ClassLabel::Two
            }
        })
        .collect();
    let features = Array2::from_shape_vec((labels.len(), p), values)
        .map_err(|e| malformed(e.to_string()))?;
    LabeledDataset::new(features, labels, path.display().to_string())
}

/// Odd digits become class 1, even digits class 2.
pub fn merge_even_odd(raw: &DigitDataset) -> Result<LabeledDataset> {
    let labels = raw
        .digits
        .iter()
        .enumerate()
        .map(|(i, &d)| match d {
            0..=9 if d % 2 == 1 => Ok(ClassLabel::One),
            0..=9 => Ok(ClassLabel::Two),
            _ => Err(Error::NonDigitLabel {
                path: raw.provenance.clone().into(),
                line: i + 1,
                label: d.to_string(),
            }),
        })
        .collect::<Result<Vec<_>>>()?;
    LabeledDataset::new(
        raw.features.clone(),
        labels,
        format!("{} (odd/even)", raw.provenance),
    )
}

/// Per class, `floor(train_fraction * n_g)` rows sampled without replacement
/// go to the training set and the rest to the test set. Both keep the
/// original row order.
pub fn stratified_split(
    data: &LabeledDataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let mut in_train = vec![false; data.len()];
    for g in ClassLabel::BOTH {
        let idx = data.class_indices(g);
        let k = (train_fraction * idx.len() as f64).floor() as usize;
        let mut rng = rng_from_seed(child_seed(seed, &[u64::from(g.number())]));
        for pick in index::sample(&mut rng, idx.len(), k) {
            in_train[idx[pick]] = true;
        }
    }
    let (train_idx, test_idx): (Vec<usize>, Vec<usize>) =
        (0..data.len()).partition(|&i| in_train[i]);
    let train = data.subset(&train_idx, format!("{} [train]", data.provenance))?;
    let test = data.subset(&test_idx, format!("{} [test]", data.provenance))?;
    train.require_both_classes()?;
    test.require_both_classes()?;
    Ok((train, test))
}

/// Largest sub-sample whose class-1 fraction is `target`: the limiting class
/// is kept whole and the other is sub-sampled uniformly.
pub fn skew_subsample(data: &LabeledDataset, target: f64, seed: u64) -> Result<LabeledDataset> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::InfeasibleProportion(target));
    }
    let [n1, n2] = data.counts();
    // floor with a relative nudge so an exactly attainable target is not lost
    // to rounding
    let nudge = |x: f64| (x * (1.0 + 1e-12)).floor() as usize;
    let keep1 = nudge(target * n2 as f64 / (1.0 - target)).min(n1);
    let (keep1, keep2) = if keep1 < n1 {
        (keep1, n2)
    } else {
        (n1, nudge(n1 as f64 * (1.0 - target) / target).min(n2))
    };
    if keep1 == 0 || keep2 == 0 {
        return Err(Error::InfeasibleProportion(target));
    }
    let mut keep = vec![false; data.len()];
    for (g, k) in [(ClassLabel::One, keep1), (ClassLabel::Two, keep2)] {
        let idx = data.class_indices(g);
        let mut rng = rng_from_seed(child_seed(seed, &[u64::from(g.number())]));
        for pick in index::sample(&mut rng, idx.len(), k) {
            keep[idx[pick]] = true;
        }
    }
    let rows: Vec<usize> = (0..data.len()).filter(|&i| keep[i]).collect();
    data.subset(&rows, format!("{} (skewed {target:.4})", data.provenance))
}

fn fill_gaussian_rows(
    out: &mut Array2<f64>,
    start: usize,
    count: usize,
    mean: ArrayView1<f64>,
    chol: &Cholesky,
    rng: &mut crate::rng::Rng,
) {
    let p = mean.len();
    let l = chol.lower();
    let mut z = Array1::<f64>::zeros(p);
    for i in start..start + count {
        z.iter_mut().for_each(|v| *v = StandardNormal.sample(rng));
        let x = l.dot(&z) + &mean;
        out.row_mut(i).assign(&x);
    }
}

/// Draws `round(n pi_1)` class-1 and the remaining class-2 samples from
/// `N(mu_g, Sigma_g)`.
pub fn synthesize_gaussian(pop: &PopulationModel, n: usize, seed: u64) -> Result<LabeledDataset> {
    let p = pop.dim();
    let n1 = (n as f64 * pop.prior(ClassLabel::One)).round() as usize;
    let sizes = [n1, n - n1];
    let (c1, c2) = match pop.covariance() {
        PopulationCovariance::Shared(s) => {
            let c = Cholesky::factor(s, 0.0)?;
            (c.clone(), c)
        }
        PopulationCovariance::PerClass(s1, s2) => {
            (Cholesky::factor(s1, 0.0)?, Cholesky::factor(s2, 0.0)?)
        }
    };
    let mut features = Array2::<f64>::zeros((n, p));
    let mut labels = Vec::with_capacity(n);
    let mut start = 0;
    for (g, chol) in [(ClassLabel::One, &c1), (ClassLabel::Two, &c2)] {
        let count = sizes[g.index()];
        let mut rng = rng_from_seed(child_seed(seed, &[u64::from(g.number())]));
        fill_gaussian_rows(&mut features, start, count, pop.mean(g), chol, &mut rng);
        labels.extend(std::iter::repeat_n(g, count));
        start += count;
    }
    LabeledDataset::new(features, labels, format!("gauss(p={p}, n={n}, seed={seed})"))
}

/// `(AR)_{ij} = rho^{|i - j|}`.
pub fn ar_matrix(p: usize, rho: f64) -> SymMatrix {
    let a = Array2::from_shape_fn((p, p), |(i, j)| rho.powi((i as i32 - j as i32).abs()));
    SymMatrix::new(a).expect("AR matrix is symmetric")
}

/// Multivariate t samples `mu_g + L z / sqrt(chi2_df / df)` with `L L^T` the
/// AR(`rho`) scale matrix and `mu_g = (-1)^g 1`; `n / 2` samples per class.
pub fn synthesize_student_t(
    n: usize,
    p: usize,
    df: u32,
    rho: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    if df < 3 {
        return Err(Error::InvalidParameter(format!(
            "degrees of freedom must be at least 3, got {df}"
        )));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidParameter(format!(
            "rho must lie in [0, 1), got {rho}"
        )));
    }
    let chol = Cholesky::factor(&ar_matrix(p, rho), 0.0)?;
    let l = chol.lower();
    let chi = ChiSquared::new(f64::from(df)).expect("df > 0");
    let sizes = [n / 2, n - n / 2];
    let mut features = Array2::<f64>::zeros((n, p));
    let mut labels = Vec::with_capacity(n);
    let mut row = 0;
    for g in ClassLabel::BOTH {
        let mean = if g == ClassLabel::One { -1.0 } else { 1.0 };
        let mut rng = rng_from_seed(child_seed(seed, &[u64::from(g.number())]));
        let mut z = Array1::<f64>::zeros(p);
        for _ in 0..sizes[g.index()] {
            z.iter_mut().for_each(|v| *v = StandardNormal.sample(&mut rng));
            let w: f64 = chi.sample(&mut rng);
            let scale = (f64::from(df) / w).sqrt();
            let x = l.dot(&z) * scale + mean;
            features.row_mut(row).assign(&x);
            labels.push(g);
            row += 1;
        }
    }
    LabeledDataset::new(
        features,
        labels,
        format!("student-t(p={p}, df={df}, rho={rho}, n={n}, seed={seed})"),
    )
}

/// Uniform sample of `k` row indices of class `g`, ascending.
pub(crate) fn sample_class_rows(
    data: &LabeledDataset,
    g: ClassLabel,
    k: usize,
    rng: &mut crate::rng::Rng,
) -> Vec<usize> {
    let idx = data.class_indices(g);
    let mut picks: Vec<usize> = index::sample(rng, idx.len(), k.min(idx.len()))
        .into_iter()
        .map(|i| idx[i])
        .collect();
    picks.sort_unstable();
    picks
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use std::io::Write;

    fn toy(labels: &[u8]) -> LabeledDataset {
        let n = labels.len();
        let f = Array2::from_shape_fn((n, 2), |(i, j)| (i * 2 + j) as f64);
        let l = labels.iter().map(|&g| ClassLabel::from_number(g).unwrap()).collect();
        LabeledDataset::new(f, l, "toy").unwrap()
    }

    fn write_idx(dir: &Path, pixels: &[u8], labels: &[u8], rows: u32, cols: u32) -> (std::path::PathBuf, std::path::PathBuf) {
        let ip = dir.join("images");
        let lp = dir.join("labels");
        let mut f = fs::File::create(&ip).unwrap();
        f.write_all(&IDX_IMAGES_MAGIC.to_be_bytes()).unwrap();
        f.write_all(&(labels.len() as u32).to_be_bytes()).unwrap();
        f.write_all(&rows.to_be_bytes()).unwrap();
        f.write_all(&cols.to_be_bytes()).unwrap();
        f.write_all(pixels).unwrap();
        let mut f = fs::File::create(&lp).unwrap();
        f.write_all(&IDX_LABELS_MAGIC.to_be_bytes()).unwrap();
        f.write_all(&(labels.len() as u32).to_be_bytes()).unwrap();
        f.write_all(labels).unwrap();
        (ip, lp)
    }

    #[test]
    fn idx_single_image_is_normalized() {
        let dir = tempfile::tempdir().unwrap();
        let mut pixels = vec![0u8; 4];
        pixels[2] = 255;
        pixels[3] = 51;
        let (ip, lp) = write_idx(dir.path(), &pixels, &[7], 2, 2);
        let raw = load_idx(&ip, &lp).unwrap();
        assert_eq!(raw.features.dim(), (1, 4));
        assert_eq!(raw.features[[0, 2]], 1.0);
        assert_eq!(raw.features[[0, 3]], 0.2);
        assert_eq!(raw.digits, vec![7]);
    }

    #[test]
    fn idx_errors() {
        let dir = tempfile::tempdir().unwrap();
        let (ip, lp) = write_idx(dir.path(), &[0u8; 8], &[1, 2], 2, 2);
        // truncated image payload: 2 images of 4 pixels need 8 bytes, cut to 7
        let bytes = fs::read(&ip).unwrap();
        fs::write(&ip, &bytes[..bytes.len() - 1]).unwrap();
        assert!(matches!(load_idx(&ip, &lp), Err(Error::TruncatedFile { .. })));
        // swapped files
        assert!(matches!(load_idx(&lp, &ip), Err(Error::BadMagic { .. })));
        // count mismatch
        let (ip, _) = write_idx(dir.path(), &[0u8; 4], &[1], 2, 2);
        let lp2 = dir.path().join("labels2");
        let mut f = fs::File::create(&lp2).unwrap();
        f.write_all(&IDX_LABELS_MAGIC.to_be_bytes()).unwrap();
        f.write_all(&2u32.to_be_bytes()).unwrap();
        f.write_all(&[1, 2]).unwrap();
        assert!(matches!(load_idx(&ip, &lp2), Err(Error::CountMismatch { images: 1, labels: 2 })));
    }

    #[test]
    fn usps_single_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("zip.train");
        let values: Vec<String> = (0..256).map(|i| format!("{:.3}", -1.0 + i as f64 / 128.0)).collect();
        fs::write(&path, format!("3.0000 {}\n", values.join(" "))).unwrap();
        let raw = load_usps(&path).unwrap();
        assert_eq!(raw.features.dim(), (1, 256));
        assert_eq!(raw.digits, vec![3]);
        assert_eq!(raw.features[[0, 0]], -1.0);
    }

    #[test]
    fn usps_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad");
        fs::write(&path, "1 0.5 0.5\n").unwrap();
        assert!(matches!(load_usps(&path), Err(Error::MalformedLine { line: 1, .. })));
        let values = vec!["0"; 256].join(" ");
        fs::write(&path, format!("12 {values}\n")).unwrap();
        assert!(matches!(load_usps(&path), Err(Error::NonDigitLabel { .. })));
        fs::write(&path, format!("x {values}\n")).unwrap();
        assert!(matches!(load_usps(&path), Err(Error::NonDigitLabel { .. })));
    }

    #[test]
    fn skin_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("skin.txt");
        fs::write(&path, "255\t0\t0\t1\n10\t20\t30\t2\n").unwrap();
        let d = load_skin(&path).unwrap();
        assert_eq!(d.row(0), array![255.0, 0.0, 0.0]);
        assert_eq!(d.labels(), &[ClassLabel::One, ClassLabel::Two]);
        fs::write(&path, "1\t2\t3\t3\n").unwrap();
        assert!(matches!(load_skin(&path), Err(Error::UnknownLabel { .. })));
        fs::write(&path, "1\t2\t3\n").unwrap();
        assert!(matches!(load_skin(&path), Err(Error::MalformedLine { .. })));
    }

    #[test]
    fn csv_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("eye.csv");
        fs::write(&path, "a,b,eyeDetection\n1.5,2,0\n3,4,1\n").unwrap();
        let d = load_csv_labeled(&path, "eyeDetection", "0").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.dim(), 2);
        assert_eq!(d.labels(), &[ClassLabel::One, ClassLabel::Two]);
        assert_eq!(d.row(1), array![3.0, 4.0]);
        // label column by index
        let d = load_csv_labeled(&path, "2", "1").unwrap();
        assert_eq!(d.labels(), &[ClassLabel::Two, ClassLabel::One]);
        fs::write(&path, "a,y\n1,0\n2,1\n3,2\n").unwrap();
        assert!(matches!(load_csv_labeled(&path, "y", "0"), Err(Error::NonBinaryLabels(3))));
        fs::write(&path, "a,y\n1,0\nfoo,1\n").unwrap();
        assert!(matches!(load_csv_labeled(&path, "y", "0"), Err(Error::MalformedCsv { .. })));
    }

    #[test]
    fn even_odd_merge() {
        let raw = DigitDataset {
            features: Array2::zeros((4, 1)),
            digits: vec![1, 3, 0, 8],
            provenance: "t".into(),
        };
        let d = merge_even_odd(&raw).unwrap();
        assert_eq!(d.counts(), [2, 2]);
        assert_eq!(d.labels()[..2], [ClassLabel::One, ClassLabel::One]);
        let bad = DigitDataset {
            digits: vec![1, 12],
            features: Array2::zeros((2, 1)),
            provenance: "t".into(),
        };
        assert!(merge_even_odd(&bad).is_err());
    }

    #[test]
    fn split_small_and_deterministic() {
        let d = toy(&[1, 2, 1, 2]);
        let (train, test) = stratified_split(&d, 0.5, 4).unwrap();
        assert_eq!(train.counts(), [1, 1]);
        assert_eq!(test.counts(), [1, 1]);
        let (train2, _) = stratified_split(&d, 0.5, 4).unwrap();
        assert_eq!(train.features(), train2.features());
        assert!(stratified_split(&d, 0.1, 4).is_err()); // empty training classes
        assert!(stratified_split(&d, 1.0, 4).is_err());
    }

    #[test]
    fn split_counts_follow_floor_rule() {
        let labels: Vec<u8> = (0..103).map(|i| if i % 5 == 0 { 1 } else { 2 }).collect();
        let d = toy(&labels);
        let (train, test) = stratified_split(&d, 0.9, 1).unwrap();
        let [n1, n2] = d.counts();
        assert_eq!(train.counts(), [(0.9 * n1 as f64) as usize, (0.9 * n2 as f64) as usize]);
        assert_eq!(train.len() + test.len(), d.len());
    }

    #[test]
    fn skew_reaches_target() {
        let labels: Vec<u8> = (0..1000).map(|i| if i % 2 == 0 { 1 } else { 2 }).collect();
        let d = toy(&labels);
        let s = skew_subsample(&d, 1.0 / 3.0, 5).unwrap();
        assert!((s.fraction(ClassLabel::One) - 1.0 / 3.0).abs() <= 1.0 / s.len() as f64);
        assert_eq!(s.count(ClassLabel::Two), 500);
        let same = skew_subsample(&d, 0.5, 5).unwrap();
        assert_eq!(same.counts(), d.counts());
        assert!(matches!(skew_subsample(&d, 0.0, 5), Err(Error::InfeasibleProportion(_))));
        assert!(matches!(skew_subsample(&d, 1.0, 5), Err(Error::InfeasibleProportion(_))));
    }

    #[test]
    fn skew_current_proportion_is_identity_for_uneven_counts() {
        let labels: Vec<u8> = (0..70).map(|i| if i < 21 { 1 } else { 2 }).collect();
        let d = toy(&labels);
        let s = skew_subsample(&d, 21.0 / 70.0, 9).unwrap();
        assert_eq!(s.counts(), [21, 49]);
    }

    #[test]
    fn gaussian_class_means() {
        let pop = PopulationModel::shared(
            array![1.0],
            array![-1.0],
            SymMatrix::identity(1),
            0.5,
        )
        .unwrap();
        let d = synthesize_gaussian(&pop, 1_000_000, 3).unwrap();
        for (g, mu) in [(ClassLabel::One, 1.0), (ClassLabel::Two, -1.0)] {
            let m = d.class_matrix(g).mean().unwrap();
            assert!((m - mu).abs() < 0.01, "class {g:?} mean {m}");
        }
        let again = synthesize_gaussian(&pop, 1000, 3).unwrap();
        assert_eq!(again.features(), synthesize_gaussian(&pop, 1000, 3).unwrap().features());
    }

    #[test]
    fn gaussian_null_population_mean_is_small() {
        let p = 5;
        let n = 4000;
        let pop = PopulationModel::shared(
            Array1::zeros(p),
            Array1::zeros(p),
            SymMatrix::identity(p),
            0.5,
        )
        .unwrap();
        let d = synthesize_gaussian(&pop, n, 8).unwrap();
        let mean = d.features().mean_axis(Axis(0)).unwrap();
        assert!(mean.dot(&mean).sqrt() <= 5.0 * (p as f64 / n as f64).sqrt());
    }

    #[test]
    fn student_t_uncorrelated_when_rho_zero() {
        let d = synthesize_student_t(10_000, 4, 5, 0.0, 2).unwrap();
        let x = d.class_matrix(ClassLabel::One);
        let mean = x.mean_axis(Axis(0)).unwrap();
        let c = &x - &mean;
        let cov = c.t().dot(&c);
        for i in 0..4 {
            for j in 0..i {
                let r = cov[[i, j]] / (cov[[i, i]] * cov[[j, j]]).sqrt();
                assert!(r.abs() <= 0.05, "corr({i},{j}) = {r}");
            }
        }
        assert_eq!(d.counts(), [5000, 5000]);
    }

    #[test]
    fn student_t_large_df_is_near_gaussian() {
        let d = synthesize_student_t(100_000, 2, 1_000_000, 0.5, 4).unwrap();
        let x = d.class_matrix(ClassLabel::Two);
        let col = x.column(0);
        let mean = col.mean().unwrap();
        let m2 = col.mapv(|v| (v - mean).powi(2)).mean().unwrap();
        let m4 = col.mapv(|v| (v - mean).powi(4)).mean().unwrap();
        let kurt = m4 / (m2 * m2);
        assert!((2.8..=3.2).contains(&kurt), "kurtosis {kurt}");
        assert!((mean - 1.0).abs() < 0.02);
    }

    #[test]
    fn student_t_rejects_bad_parameters() {
        assert!(synthesize_student_t(10, 2, 2, 0.5, 0).is_err());
        assert!(synthesize_student_t(10, 2, 5, 1.0, 0).is_err());
    }

    #[test]
    fn non_finite_features_rejected() {
        let f = array![[1.0], [f64::NAN]];
        assert!(LabeledDataset::new(f, vec![ClassLabel::One, ClassLabel::Two], "x").is_err());
    }
}
