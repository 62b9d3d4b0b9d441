use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: missing required column `{column}`")]
    MissingColumn { path: PathBuf, column: String },

    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("generated scenario failed self-check: {0}")]
    SelfCheck(String),

    #[error("invalid report input: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors caused by bad user input, as opposed to an internal fault.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::SelfCheck(_))
    }
}
