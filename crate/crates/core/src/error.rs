//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by any warmlab operation.
#[derive(Debug, Error)]
pub enum Error {
    /// A scalar or vector argument violated its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two vectors that must agree in length did not.
    #[error("shape mismatch: {context} (expected {expected}, got {got})")]
    ShapeMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// An optimizer/schedule combination that the contract forbids.
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    /// Pearson correlation is undefined when one input has zero variance.
    #[error("undefined correlation: {0} has zero variance")]
    UndefinedCorrelation(&'static str),

    /// Coefficient of variation is undefined when the sample mean is zero.
    #[error("undefined coefficient of variation: sample mean is zero")]
    UndefinedCv,

    /// An IDX file did not start with the expected magic number.
    #[error("{path}: bad IDX magic: expected {expected:#010x}, got {got:#010x}")]
    IdxMagic {
        path: String,
        expected: u32,
        got: u32,
    },

    /// An IDX file ended before its declared payload.
    #[error("{path}: truncated IDX payload at byte {offset}: need {needed} more bytes")]
    IdxTruncated {
        path: String,
        offset: usize,
        needed: usize,
    },

    /// Image and label files disagree on the number of items.
    #[error("IDX count mismatch: {images} images vs {labels} labels")]
    IdxCountMismatch { images: usize, labels: usize },

    /// A computation produced a non-finite value or failed to converge.
    #[error("numeric failure: {0}")]
    NumericFailure(String),

    /// Underlying I/O failure, with the path that was being read or written.
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
