use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("input truncated: {0}")]
    Truncated(String),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    #[error("training diverged at batch {batch}: non-finite loss")]
    Divergence {
        batch: usize,
        /// Epochs completed before the failure.
        partial: Option<Box<crate::nn::TrainReport>>,
    },

    #[error("split error: {0}")]
    Split(String),

    #[error("empty window set: {0}")]
    EmptyWindowSet(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// Attach a file path to an error raised while processing that file.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
