use std::path::PathBuf;

use primalign::AlignError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("PLY parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("unsupported PLY format: {0}")]
    UnsupportedFormat(String),

    #[error("model file {0} not found and fallback disabled")]
    MissingModel(PathBuf),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Align(#[from] AlignError),
}

impl BenchError {
    pub(crate) fn at_line(line: usize, message: impl Into<String>) -> Self {
        Self::Parse {
            location: format!("line {line}"),
            message: message.into(),
        }
    }

    pub(crate) fn at_offset(offset: u64, message: impl Into<String>) -> Self {
        Self::Parse {
            location: format!("byte offset {offset}"),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
