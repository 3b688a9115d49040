use std::path::PathBuf;

use chrono::NaiveDate;
use thiserror::Error;

/// Errors produced by the analysis and I/O routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("malformed raster header {path}: {reason}")]
    Header { path: PathBuf, reason: String },

    #[error("unsupported dtype '{0}' (expected \"f32le\")")]
    UnsupportedDtype(String),

    #[error("payload {path} has {actual} bytes, header requires {expected}")]
    PayloadSize {
        path: PathBuf,
        expected: u64,
        actual: u64,
    },

    #[error("grid mismatch between {first} and {second}")]
    GridMismatch { first: String, second: String },

    #[error("timestamp error: {0}")]
    Timestamps(String),

    #[error("missing required CSV column(s): {}", .0.join(", "))]
    MissingColumns(Vec<String>),

    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },

    #[error("inverted date range: {start} > {end}")]
    InvertedRange { start: NaiveDate, end: NaiveDate },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid value: {0}")]
    Validation(String),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input (files, flags, data) as
    /// opposed to failures of the host environment.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Io { source, .. } => matches!(
                source.kind(),
                std::io::ErrorKind::NotFound
                    | std::io::ErrorKind::PermissionDenied
                    | std::io::ErrorKind::InvalidData
                    | std::io::ErrorKind::UnexpectedEof
            ),
            _ => true,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
