use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed header: {message}")]
    MalformedHeader { line: usize, message: String },
    #[error("line {line}: expected {expected} values, found {found}")]
    RowArityMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: missing value in column `{column}`")]
    MissingValue { line: usize, column: String },
    #[error("line {line}: non-numeric value `{value}` in feature column `{column}`")]
    NonNumericFeature {
        line: usize,
        column: String,
        value: String,
    },
    #[error("label column `{0}` not found")]
    MissingLabelColumn(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] pa_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
