use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input text. `row` and `column` are 1-based.
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("tablecloth {index} has {found} samples, expected {expected}")]
    SampleCountMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("unknown session `{0}`")]
    UnknownSession(String),

    #[error("corrupt session file {path}: line {line}, column {column}: {message}")]
    CorruptSession {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("session has no tablecloths")]
    NoData,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(row: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            row,
            column,
            message: message.into(),
        }
    }
}
