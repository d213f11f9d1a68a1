use std::path::PathBuf;

use thiserror::Error;

/// Everything that can go wrong inside the library.
///
/// All variants describe bad input data or I/O trouble; the CLI maps them to
/// the "data error" exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Line { line: usize, message: String },

    #[error("duplicate id {id:?} at records {first} and {second}")]
    DuplicateId {
        id: String,
        first: usize,
        second: usize,
    },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("training data has only the {0} class")]
    SingleClass(&'static str),

    #[error("class {class} has {count} members, fewer than k = {k}")]
    TooFewMembers {
        class: &'static str,
        count: usize,
        k: usize,
    },

    #[error("record {id:?} is missing the {field} label")]
    MissingLabel { id: String, field: &'static str },

    #[error("model file: {0}")]
    Model(String),

    #[error("lexicon: {0}")]
    Lexicon(String),

    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
