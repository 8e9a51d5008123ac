use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("row {row}, column {column}: cannot parse {value:?} as a number")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}, column {column}: missing value")]
    MissingValue { row: usize, column: String },

    #[error("response column {0:?} not found")]
    MissingColumn(String),

    #[error("binary response out of range: row {row} has value {value}")]
    BinaryOutOfRange { row: usize, value: f64 },

    #[error("survival time must be positive and finite: row {row} has {value}")]
    NonPositiveTime { row: usize, value: f64 },

    #[error("status must be 0 or 1: row {row} has {value}")]
    InvalidStatus { row: usize, value: f64 },

    #[error("no events: every observation is censored")]
    NoEvents,

    #[error("constant column {0:?} cannot be standardized")]
    ConstantColumn(String),

    #[error("non-finite value in design matrix at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("response does not match family {0}")]
    FamilyMismatch(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("subset size {k} exceeds the feasible cap {cap}")]
    InfeasibleK { k: usize, cap: usize },

    #[error("null true signal: |X beta*| is zero")]
    NullSignal,

    #[error("no comparable pairs for the concordance index")]
    NoComparablePairs,

    #[error("exhaustive search refused: p = {p} exceeds the cap {cap}")]
    OracleTooLarge { p: usize, cap: usize },
}

impl Error {
    /// Short stable tag used by the CLI's one-line error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
            Error::NonNumeric { .. } => "non-numeric",
            Error::MissingValue { .. } => "missing-value",
            Error::MissingColumn(_) => "missing-column",
            Error::BinaryOutOfRange { .. } => "binary-range",
            Error::NonPositiveTime { .. } => "survival-time",
            Error::InvalidStatus { .. } => "survival-status",
            Error::NoEvents => "no-events",
            Error::ConstantColumn(_) => "constant-column",
            Error::NonFinite { .. } => "non-finite",
            Error::Dimension(_) => "dimension",
            Error::FamilyMismatch(_) => "family-mismatch",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::InfeasibleK { .. } => "infeasible-k",
            Error::NullSignal => "null-signal",
            Error::NoComparablePairs => "no-comparable-pairs",
            Error::OracleTooLarge { .. } => "oracle-too-large",
        }
    }
}
