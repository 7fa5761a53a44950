use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = BenchError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: compda::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {reason}")]
    Output { path: PathBuf, reason: String },

    #[error("invalid record: {0}")]
    InvalidRecord(String),
}

impl BenchError {
    pub fn config(msg: impl Into<String>) -> Self {
        BenchError::Config(msg.into())
    }

    pub fn core(context: impl Into<String>, source: compda::Error) -> Self {
        BenchError::Core {
            context: context.into(),
            source,
        }
    }

    /// 2 for configuration, 3 for data, 4 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        use compda::Error as E;
        match self {
            BenchError::Config(_) => 2,
            BenchError::Core { source, .. } => match source {
                E::NotPositiveDefinite { .. }
                | E::DegenerateSpectrum(_)
                | E::ZeroDirection
                | E::NotSymmetric { .. } => 4,
                E::InvalidSparsity(_)
                | E::InvalidEta(_)
                | E::InvalidParameter(_)
                | E::UnequalPriors(_) => 2,
                _ => 3,
            },
            BenchError::Io { .. } | BenchError::Output { .. } | BenchError::InvalidRecord(_) => 3,
        }
    }
}

/// Tags a core error with the operation that produced it.
pub(crate) trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T>;
}

impl<T> Context<T> for compda::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|e| BenchError::core(what(), e))
    }
}
