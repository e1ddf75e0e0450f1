use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A model table does not match the declared dimensions.
    #[error("dimension mismatch in {table}: expected {expected} entries, got {actual}")]
    Dimension {
        table: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("row sum of P(.|s={state}, a={action}) is {sum}, expected 1")]
    RowSum { state: usize, action: usize, sum: f64 },

    #[error("negative or non-finite probability at (s={state}, a={action}, s'={next})")]
    InvalidProbability {
        state: usize,
        action: usize,
        next: usize,
    },

    #[error("non-absorbing/nonzero-reward terminal state {state}")]
    NonAbsorbingTerminal { state: usize },

    #[error("{what} index {index} out of range (< {bound})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        bound: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Configuration errors always name the offending key.
    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{0}")]
    Unsupported(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by user-supplied configuration rather than
    /// runtime failures.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config { .. } | Error::InvalidParameter(_) | Error::Unsupported(_)
        )
    }
}
