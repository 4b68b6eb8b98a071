use std::io;

use thiserror::Error;

/// Errors produced by the library.
///
/// The CLI maps [`Error::Contract`] to exit code 2 and everything else to 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("format error in field `{field}`: {message}")]
    Format { field: String, message: String },

    #[error("parse error in streamline {streamline}: {message}")]
    Parse { streamline: usize, message: String },

    #[error("unsupported format: {0}")]
    Unsupported(String),

    #[error("zero-length trajectory")]
    ZeroLength,

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("step {step} outside range [{first}, {last}]")]
    Range {
        step: usize,
        first: usize,
        last: usize,
    },

    #[error("invalid transition: {0}")]
    InvalidTransition(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("epsilon mismatch: {0} vs {1}")]
    EpsilonMismatch(f64, f64),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn format(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn contract(message: impl Into<String>) -> Self {
        Error::Contract(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
