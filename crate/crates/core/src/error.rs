use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure to read a persisted Q-table.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TableParseError {
    #[error("malformed q-table at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported q-table version {found} (expected {expected})")]
    Version { found: i64, expected: i64 },
    #[error("q-table dimension mismatch at {location}: expected {expected}, found {found}")]
    Dimension {
        location: String,
        expected: usize,
        found: usize,
    },
    #[error("duplicate {kind} label `{label}` at index {index}")]
    DuplicateLabel {
        kind: &'static str,
        label: String,
        index: usize,
    },
}

/// Failure to read or validate a map or config document.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DocumentError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("field `{field}`: {message}")]
    Invalid { field: String, message: String },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown state label `{0}`")]
    UnknownState(String),
    #[error("unknown action label `{0}`")]
    UnknownAction(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    TableParse(#[from] TableParseError),
    #[error("map `{source_name}`: {error}")]
    Map {
        source_name: String,
        error: DocumentError,
    },
    #[error("config `{source_name}`: {error}")]
    Config {
        source_name: String,
        error: DocumentError,
    },
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("numeric fault at epoch {epoch}, step {step}: {detail}")]
    NumericFault {
        epoch: usize,
        step: usize,
        detail: String,
    },
    #[error("malformed metrics csv: {0}")]
    Csv(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
