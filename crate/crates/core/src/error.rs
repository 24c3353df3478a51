//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value violated a domain invariant (non-finite logit, bad probability vector, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// A record in an input file was malformed.
    #[error("record `{record}`: field `{field}`: {message}")]
    Record {
        record: String,
        field: String,
        message: String,
    },

    /// A score vector had the wrong number of entries.
    #[error("record `{record}`: expected 6 scores, found {found}")]
    Arity { record: String, found: usize },

    /// Two collections that must share the same id set did not.
    #[error("id sets differ: only in left {only_left:?}, only in right {only_right:?}")]
    IdMismatch {
        only_left: Vec<String>,
        only_right: Vec<String>,
    },

    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),

    /// The optimizer encountered a non-finite objective or gradient.
    #[error("optimization aborted: {0}")]
    NonFinite(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn input(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Input {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn record(
        record: impl Into<String>,
        field: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Record {
            record: record.into(),
            field: field.into(),
            message: message.into(),
        }
    }
}
