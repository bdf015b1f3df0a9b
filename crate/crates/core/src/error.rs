//! Error type shared across the toolkit.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{row}:{col}: parse error: {msg}")]
    Parse {
        path: PathBuf,
        /// 1-based row in the file.
        row: usize,
        /// 1-based column in the row.
        col: usize,
        msg: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("degenerate illuminant: {0}")]
    DegenerateIlluminant(String),

    #[error("degenerate image: {0}")]
    DegenerateImage(String),

    #[error("feature schema mismatch: expected {expected}, got {actual}")]
    SchemaMismatch { expected: String, actual: String },

    #[error("underdetermined system: {0}")]
    Underdetermined(String),

    #[error("rank-deficient system: {0}")]
    RankDeficient(String),

    #[error("no real sharpening: {0}")]
    NoRealSharpening(String),

    #[error("camera mismatch: transform maps {expected} but dataset is {actual}")]
    CameraMismatch { expected: String, actual: String },

    #[error("empty dataset: {0}")]
    EmptyDataset(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
