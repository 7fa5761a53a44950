//! Experiment harness for compressed discriminant analysis: replicated
//! error-rate sweeps, covariance timing, PCA dumps and error-bound curves.
//! All randomness derives from one master seed; output is CSV.

pub mod bound;
pub mod cli;
pub mod data;
mod error;
pub mod experiment;
pub mod pca;

pub use data::{DataConfig, DatasetKind, DatasetSpec, Split};
pub use error::{BenchError, Result};
pub use experiment::{ExperimentConfig, Method, MetricsRecord};
