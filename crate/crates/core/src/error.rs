//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Tensor or model shapes disagree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A simulated quantity left the representable range.
    #[error("non-finite value in {context} at step {step} (sample {sample})")]
    NonFinite {
        context: String,
        step: usize,
        sample: usize,
    },

    /// Training produced a non-finite loss or gradient.
    #[error("training diverged at iteration {iteration}: {context}")]
    Diverged { iteration: usize, context: String },

    /// Checkpoint or report I/O failed.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A persisted artifact could not be decoded.
    #[error("format error: {0}")]
    Format(String),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Format(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
