//! Crate-wide error type.

use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("invalid topology: {0}")]
    Topology(String),

    #[error("non-finite value encountered during {0}")]
    NonFinite(&'static str),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("duplicate date {0} in price series")]
    DuplicateDate(NaiveDate),

    #[error("no usable rows in input")]
    EmptyInput,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate price range: min == max == {0}")]
    DegenerateRange(f64),

    #[error("trading calendar exhausted after {0}")]
    CalendarExhausted(NaiveDate),

    #[error("insufficient price history before {0}")]
    Coverage(NaiveDate),

    #[error("training diverged at epoch {epoch} (run {run_index})")]
    Diverged { epoch: usize, run_index: usize },

    #[error("all {0} training runs diverged")]
    TrainingFailed(usize),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("empty sample list")]
    EmptySamples,

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
