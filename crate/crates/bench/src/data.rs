//! Dataset selection: file formats, synthetic generators and the train/test
//! split used by every experiment.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use compda::datasets::{
    load_csv_labeled, load_idx, load_skin, load_usps, merge_even_odd, skew_subsample,
    stratified_split, synthesize_gaussian, synthesize_student_t,
};
use compda::rng::child_seed;
use compda::{LabeledDataset, PopulationModel};

use crate::error::{BenchError, Context, Result};

const SPLIT_STREAM: u64 = 0x5350_4c49_5400;
const SKEW_STREAM: u64 = 0x534b_4557_0000;
const SYNTH_STREAM: u64 = 0x5359_4e54_4800;

/// Label column and class-1 value of the converted Eye State CSV.
pub const EYE_STATE_LABEL: &str = "eyeDetection";
pub const EYE_STATE_POSITIVE: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    Zip,
    Mnist,
    Skin,
    EyeState,
    Csv,
    Gauss,
    StudentT,
}

impl DatasetKind {
    pub const ALL: [DatasetKind; 7] = [
        DatasetKind::Zip,
        DatasetKind::Mnist,
        DatasetKind::Skin,
        DatasetKind::EyeState,
        DatasetKind::Csv,
        DatasetKind::Gauss,
        DatasetKind::StudentT,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DatasetKind::Zip => "zip",
            DatasetKind::Mnist => "mnist",
            DatasetKind::Skin => "skin",
            DatasetKind::EyeState => "eyestate",
            DatasetKind::Csv => "csv",
            DatasetKind::Gauss => "gauss",
            DatasetKind::StudentT => "student-t",
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DatasetKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| BenchError::config(format!("unknown dataset {s:?}")))
    }
}

/// Where the samples come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSpec {
    /// USPS text files, digits merged into odd / even.
    Zip { train: PathBuf, test: PathBuf },
    /// IDX files, digits merged into odd / even. Without test files the
    /// training set is split.
    Mnist {
        images: PathBuf,
        labels: PathBuf,
        test: Option<(PathBuf, PathBuf)>,
    },
    Skin { path: PathBuf },
    /// Eye State converted to CSV with the `eyeDetection` label column.
    EyeState { path: PathBuf },
    Csv {
        train: PathBuf,
        test: Option<PathBuf>,
        label_column: String,
        positive_label: String,
    },
    /// Two Gaussian classes, identity covariance, `mu_1 = -mu_2`.
    Gauss {
        n: usize,
        n_test: usize,
        p: usize,
        delta_sq: f64,
    },
    /// Multivariate t with AR(`rho`) scale and means `-1`, `+1`.
    StudentT {
        n: usize,
        n_test: usize,
        p: usize,
        df: u32,
        rho: f64,
    },
}

impl DatasetSpec {
    pub fn kind(&self) -> DatasetKind {
        match self {
            DatasetSpec::Zip { .. } => DatasetKind::Zip,
            DatasetSpec::Mnist { .. } => DatasetKind::Mnist,
            DatasetSpec::Skin { .. } => DatasetKind::Skin,
            DatasetSpec::EyeState { .. } => DatasetKind::EyeState,
            DatasetSpec::Csv { .. } => DatasetKind::Csv,
            DatasetSpec::Gauss { .. } => DatasetKind::Gauss,
            DatasetSpec::StudentT { .. } => DatasetKind::StudentT,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataConfig {
    pub spec: DatasetSpec,
    /// Training fraction when no separate test data exists.
    pub train_frac: f64,
    /// Target class-1 fraction of the training set, reached by
    /// sub-sampling.
    pub skew_class1: Option<f64>,
}

impl DataConfig {
    pub fn new(spec: DatasetSpec) -> Self {
        Self {
            spec,
            train_frac: 0.9,
            skew_class1: None,
        }
    }

    pub fn name(&self) -> &'static str {
        self.spec.kind().name()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_frac > 0.0 && self.train_frac < 1.0) {
            return Err(BenchError::config(format!(
                "train-frac must lie in (0, 1), got {}",
                self.train_frac
            )));
        }
        if let Some(t) = self.skew_class1 {
            if !(t > 0.0 && t < 1.0) {
                return Err(BenchError::config(format!(
                    "skew-class1 must lie in (0, 1), got {t}"
                )));
            }
        }
        match &self.spec {
            DatasetSpec::Gauss { n, n_test, p, delta_sq } => {
                if *n < 4 || *n_test < 2 || *p == 0 || !(*delta_sq >= 0.0) {
                    return Err(BenchError::config("invalid gauss parameters"));
                }
            }
            DatasetSpec::StudentT { n, n_test, p, .. } => {
                if *n < 4 || *n_test < 2 || *p == 0 {
                    return Err(BenchError::config("invalid student-t parameters"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Loads or generates the data and returns `(train, test)`. The split,
    /// skew and synthetic draws are derived from `seed`.
    pub fn load(&self, seed: u64) -> Result<Split> {
        self.validate()?;
        let split_seed = child_seed(seed, &[SPLIT_STREAM]);
        let (train, test) = match &self.spec {
            DatasetSpec::Zip { train, test } => {
                let tr = load_usps(train).and_then(|d| merge_even_odd(&d));
                let te = load_usps(test).and_then(|d| merge_even_odd(&d));
                (
                    tr.context(|| "loading zip training data".into())?,
                    te.context(|| "loading zip test data".into())?,
                )
            }
            DatasetSpec::Mnist { images, labels, test } => {
                let tr = load_idx(images, labels)
                    .and_then(|d| merge_even_odd(&d))
                    .context(|| "loading mnist training data".into())?;
                match test {
                    Some((ti, tl)) => (
                        tr,
                        load_idx(ti, tl)
                            .and_then(|d| merge_even_odd(&d))
                            .context(|| "loading mnist test data".into())?,
                    ),
                    None => self.split(&tr, split_seed)?,
                }
            }
            DatasetSpec::Skin { path } => {
                let all = load_skin(path).context(|| "loading skin data".into())?;
                self.split(&all, split_seed)?
            }
            DatasetSpec::EyeState { path } => {
                let all = load_csv_labeled(path, EYE_STATE_LABEL, EYE_STATE_POSITIVE)
                    .context(|| "loading eye state data".into())?;
                self.split(&all, split_seed)?
            }
            DatasetSpec::Csv {
                train,
                test,
                label_column,
                positive_label,
            } => {
                let tr = load_csv_labeled(train, label_column, positive_label)
                    .context(|| "loading csv training data".into())?;
                match test {
                    Some(t) => (
                        tr,
                        load_csv_labeled(t, label_column, positive_label)
                            .context(|| "loading csv test data".into())?,
                    ),
                    None => self.split(&tr, split_seed)?,
                }
            }
            DatasetSpec::Gauss { n, n_test, p, delta_sq } => {
                let pop = PopulationModel::isotropic(*p, *delta_sq)
                    .context(|| "building gauss population".into())?;
                let gen = |k: u64, n: usize| {
                    synthesize_gaussian(&pop, n, child_seed(seed, &[SYNTH_STREAM, k]))
                        .context(|| "generating gauss data".into())
                };
                (gen(0, *n)?, gen(1, *n_test)?)
            }
            DatasetSpec::StudentT { n, n_test, p, df, rho } => {
                let gen = |k: u64, n: usize| {
                    synthesize_student_t(n, *p, *df, *rho, child_seed(seed, &[SYNTH_STREAM, k]))
                        .context(|| "generating student-t data".into())
                };
                (gen(0, *n)?, gen(1, *n_test)?)
            }
        };
        if train.dim() != test.dim() {
            return Err(BenchError::core(
                "train and test feature counts differ",
                compda::Error::DimensionMismatch {
                    what: "test feature count",
                    expected: train.dim(),
                    got: test.dim(),
                },
            ));
        }
        let train = match self.skew_class1 {
            Some(t) => skew_subsample(&train, t, child_seed(seed, &[SKEW_STREAM]))
                .context(|| format!("skewing training data to class-1 fraction {t}"))?,
            None => train,
        };
        Ok(Split { train, test })
    }

    fn split(&self, data: &LabeledDataset, seed: u64) -> Result<(LabeledDataset, LabeledDataset)> {
        stratified_split(data, self.train_frac, seed)
            .context(|| format!("splitting {} with train fraction {}", self.name(), self.train_frac))
    }
}

#[derive(Debug, Clone)]
pub struct Split {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
}
