use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, HofmError>;

#[derive(Debug, Error)]
pub enum HofmError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Malformed data file (svmlight, pair list).
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Malformed or inconsistent model file.
    #[error("model format error at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("training diverged at epoch {epoch}: {message}")]
    Divergence { epoch: usize, message: String },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl HofmError {
    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        HofmError::InvalidArgument(message.into())
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        HofmError::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn format(line: usize, message: impl Into<String>) -> Self {
        HofmError::Format {
            line,
            message: message.into(),
        }
    }
}
