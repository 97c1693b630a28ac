use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the ingestion, fitting and backtesting pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("line {line}: price must be positive, got {price}")]
    NonPositivePrice { line: u64, price: f64 },

    #[error("invalid session series: {0}")]
    InvalidSeries(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("design has {rows} rows but {cols} regressors need at least {needed}")]
    TooFewRows { rows: usize, cols: usize, needed: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config field `{field}`: {msg}")]
    Config { field: String, msg: String },

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
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: u64, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    pub(crate) fn config(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config { field: field.into(), msg: msg.into() }
    }

    /// Attach a file path to an error raised while reading that file.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        Error::File { path: path.into(), source: Box::new(self) }
    }

    /// Process exit status: 1 for usage/config problems, 2 for data problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::InvalidArgument(_) => 1,
            Error::File { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
