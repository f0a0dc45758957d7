//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Two codes (or a weight vector and a code) of different bit lengths
    /// were combined.
    #[error("bit length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An operation was applied to a value in a state it does not accept,
    /// e.g. an EGD step on a weight vector with a non-positive component.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// The sampler ran out of distinct quadruplets within its rejection
    /// budget.
    #[error("sampling exhausted: {0}")]
    Exhausted(String),

    /// A text input (CSV, config file) failed to parse; `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A binary file did not match its expected format.
    #[error("format error in {path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid_argument(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            msg: msg.into(),
        }
    }
}
