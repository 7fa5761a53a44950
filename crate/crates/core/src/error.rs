use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} at index {index}); increase the ridge")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(&'static str),

    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("sparsity must lie in (0, 1), got {0}")]
    InvalidSparsity(f64),

    #[error("confidence level eta must lie in (0, 1), got {0}")]
    InvalidEta(f64),

    #[error("class {0} has no samples")]
    EmptyClass(u8),

    #[error("the closed-form error rate requires equal priors, got pi_1 = {0}")]
    UnequalPriors(f64),

    #[error("discriminant direction is zero")]
    ZeroDirection,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}: bad magic number {found:#010x} (expected {expected:#010x})")]
    BadMagic {
        path: PathBuf,
        expected: u32,
        found: u32,
    },

    #[error("{path}: file truncated (needed {needed} bytes, have {have})")]
    TruncatedFile {
        path: PathBuf,
        needed: usize,
        have: usize,
    },

    #[error("image count {images} does not match label count {labels}")]
    CountMismatch { images: usize, labels: usize },

    #[error("{path}:{line}: {reason}")]
    MalformedLine {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("{path}:{line}: label {label} is not a digit 0-9")]
    NonDigitLabel {
        path: PathBuf,
        line: usize,
        label: String,
    },

    #[error("{path}:{line}: unknown class label {label}")]
    UnknownLabel {
        path: PathBuf,
        line: usize,
        label: String,
    },

    #[error("{path}: malformed csv: {reason}")]
    MalformedCsv { path: PathBuf, reason: String },

    #[error("label column has {0} distinct values, expected 2")]
    NonBinaryLabels(usize),

    #[error("class-1 fraction {0} cannot be reached by sub-sampling")]
    InfeasibleProportion(f64),

    #[error("non-finite feature value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
