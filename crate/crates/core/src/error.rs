use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    /// A malformed DRS-JSON record. `field` is a JSON path such as `nodes[2].preds[0].pos`.
    #[error("line {line}: field `{field}`: {message}")]
    Record {
        line: usize,
        field: String,
        message: String,
    },

    #[error("line {line}: duplicate variable `{var}`")]
    DuplicateVar { line: usize, var: String },

    #[error("invalid graph `{id}`: {message}")]
    InvalidGraph { id: String, message: String },

    #[error("{0}: no usable training material")]
    EmptyCorpus(&'static str),

    #[error("{count} events exceed the enumeration limit of {max}; keep the sentence unsplit")]
    TooManyEvents { count: usize, max: usize },

    /// A model file that does not follow its serialization format.
    #[error("{path}:{line}: {message}")]
    Model {
        path: String,
        line: usize,
        message: String,
    },

    #[error("configuration: {0}")]
    Config(String),

    #[error("misaligned inputs: {0}")]
    Misaligned(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(id: &str, message: impl Into<String>) -> Self {
        Error::InvalidGraph {
            id: id.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn model(path: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Model {
            path: path.to_string(),
            line,
            message: message.into(),
        }
    }
}
