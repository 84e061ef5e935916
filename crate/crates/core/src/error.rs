use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The data do not support the requested statistic (flat histogram,
    /// single-class labels, ...).
    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("covariance is not positive definite after adding ridge {ridge:e}")]
    Singular { ridge: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// Training produced a non-finite value; `trace` holds the total loss of
    /// every epoch up to and including the failing one.
    #[error("training diverged at epoch {epoch}: {detail}")]
    Diverged { epoch: usize, detail: String, trace: Vec<f64> },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format { path: path.into(), msg: msg.into() }
    }

    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Singular { .. } | Error::NonFinite(_) | Error::Diverged { .. })
    }
}
