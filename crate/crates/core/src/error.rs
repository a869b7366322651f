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

    #[error("line {line}: {message}")]
    Row { line: u64, message: String },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value in input at row {row}")]
    NonFinite { row: usize },

    #[error("events are not sorted by (user_id, timestamp) at position {position}")]
    Unsorted { position: usize },

    #[error("unknown domain `{0}`")]
    UnknownDomain(String),

    #[error("svd failed: {0}")]
    Svd(String),

    #[error("malformed {what}: {message}")]
    Format { what: String, message: String },

    #[error("invalid synthetic spec: {0}")]
    Spec(String),

    #[error("workspace {0} is locked by another process")]
    Locked(PathBuf),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(what: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            what: what.into(),
            message: message.into(),
        }
    }

    /// True for failures caused by the content of input data rather than by
    /// how the program was invoked.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Row { .. }
                | Error::Csv(_)
                | Error::NonFinite { .. }
                | Error::Unsorted { .. }
                | Error::Svd(_)
                | Error::Format { .. }
                | Error::Json(_)
        )
    }
}
