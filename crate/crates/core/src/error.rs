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

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: schema error: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("{path}: row {row}, field `{field}`: {message}")]
    Field {
        path: PathBuf,
        row: u64,
        field: String,
        message: String,
    },

    #[error("{path}: {bad} of {total} rows unparseable (tolerance is 1%)")]
    TooManyBadRows { path: PathBuf, bad: u64, total: u64 },

    #[error("duplicate subject_id `{0}`")]
    DuplicateSubject(String),

    #[error("unknown modality `{0}`")]
    UnknownModality(String),

    #[error("label for subject `{subject}` at {slot_start_ms}: {reason}")]
    InvalidLabel {
        subject: String,
        slot_start_ms: i64,
        reason: String,
    },

    #[error("subject `{0}` has no demographic record")]
    MissingDemographics(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("linear system is singular")]
    Singular,

    #[error("unknown model `{0}`")]
    UnknownModel(String),

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

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn schema(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}
