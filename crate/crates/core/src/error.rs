use chrono::NaiveDate;
use thiserror::Error;

/// Errors raised anywhere in the forecasting and backtesting pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed input at row {row}: {message}")]
    MalformedRow { row: usize, message: String },

    #[error("non-positive price at {date}")]
    NonPositivePrice { date: NaiveDate },

    #[error("duplicate date {date} at row {row}")]
    DuplicateDate { date: NaiveDate, row: usize },

    #[error("series too short: need at least {needed} observations, have {have}")]
    TooShort { needed: usize, have: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("date {date} outside series range {first}..={last}")]
    OutOfRange {
        date: NaiveDate,
        first: NaiveDate,
        last: NaiveDate,
    },

    #[error("invalid parameter {name}: {message}")]
    InvalidParameter { name: String, message: String },

    #[error("non-finite likelihood at observation {index}")]
    NonFiniteLikelihood { index: usize },

    #[error("optimizer did not converge (best negative log-likelihood {best_nll})")]
    NonConvergence { best_nll: f64, best_params: Vec<f64> },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("rank-deficient design: column {column} is collinear with {others:?}")]
    RankDeficient { column: String, others: Vec<String> },

    #[error("VaR evaluation failed at node {node} (level {level}): {message}")]
    NodeFailure { node: usize, level: f64, message: String },

    #[error("tail index out of range: no sign change below k = {limit}")]
    TailIndexOutOfRange { limit: f64 },

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn param(name: &str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            message: message.into(),
        }
    }

    /// True for errors caused by bad user input (config, files, arguments)
    /// as opposed to failures while computing.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::MalformedRow { .. }
                | Error::NonPositivePrice { .. }
                | Error::DuplicateDate { .. }
                | Error::OutOfRange { .. }
                | Error::InvalidParameter { .. }
                | Error::Config { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
