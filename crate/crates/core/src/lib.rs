//! Linear and quadratic discriminant analysis trained on class-wise
//! compressed samples.
//!
//! Each class `X^g` (`n_g x p`) is replaced by `m_g` compressed samples
//! formed with a sparse random matrix `Q^g`:
//!
//! ```text
//! x_{j,c} = (n_g s)^{-1/2} * sum_i Q_{j,i} (x_i - mean_g) + mean_g
//! ```
//!
//! The within-class covariance is then estimated from the `m = m_1 + m_2`
//! compressed samples in `O(m p^2)` instead of `O(n p^2)`, while the class
//! means and the mean difference stay exact.
//!
//! Modules:
//! - [`linalg`]: Cholesky solve, log-determinant and two-component PCA.
//! - [`compression`]: sparse Rademacher / Gaussian / count-sketch matrices and
//!   class compression.
//! - [`discriminant`]: Full, Compressed, Projected, Sub-sampled and FRF LDA;
//!   Full, Compressed and Sub-sampled QDA.
//! - [`theory`]: Bayes error, the plug-in error of a fitted linear rule and
//!   the `O(m^{-1/2})` error bound.
//! - [`datasets`]: IDX / USPS / Skin / CSV loaders, splits and synthetic data.

pub mod compression;
pub mod datasets;
pub mod discriminant;
mod error;
pub mod linalg;
pub mod rng;
pub mod theory;

pub use compression::{CompressedClassData, MatrixFamily, SparseCompressionMatrix};
pub use datasets::{ClassLabel, DigitDataset, LabeledDataset};
pub use discriminant::{
    ClassStatistics, FitConfig, LinearModel, LinearVariant, QuadraticModel, QuadraticVariant,
};
pub use error::{Error, Result};
pub use linalg::SymMatrix;
pub use theory::PopulationModel;
