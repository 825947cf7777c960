use std::path::PathBuf;

use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure classes, mapped onto process exit codes by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numerical,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Usage => 1,
            ErrorClass::Data => 2,
            ErrorClass::Numerical => 3,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("usage: {0}")]
    InvalidParameter(String),

    #[error("io: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("ingest: csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("ingest: first header must be `Date`, found `{0}`")]
    BadHeader(String),
    #[error("ingest: malformed cell at (row {row}, col {col}): `{value}`")]
    MalformedCell {
        row: usize,
        col: usize,
        value: String,
    },
    #[error("ingest: nonpositive price at ({row},{col})")]
    NonpositivePrice { row: usize, col: usize },
    #[error("ingest: duplicate date {0}")]
    DuplicateDate(NaiveDate),
    #[error("ingest: duplicate ticker `{0}`")]
    DuplicateTicker(String),
    #[error("ingest: requested ticker `{0}` absent from input")]
    MissingTicker(String),
    #[error("ingest: at least {need} tickers required, found {got}")]
    TooFewTickers { need: usize, got: usize },
    #[error("{module}: need at least {need} rows, got {got}")]
    TooFewRows {
        module: &'static str,
        need: usize,
        got: usize,
    },

    #[error("dissim: zero sample variance for `{0}`")]
    ZeroVariance(String),
    #[error("{module}: insufficient observations for OLS ({obs} usable rows, {regressors} regressors); supply ridge_lambda > 0")]
    InsufficientObservations {
        module: &'static str,
        obs: usize,
        regressors: usize,
    },
    #[error("{module}: singular matrix in {what}")]
    Singular {
        module: &'static str,
        what: &'static str,
    },
    #[error("{module}: non-finite value in {what}")]
    NonFinite {
        module: &'static str,
        what: &'static str,
    },
    #[error("dissim: residual variance of `{0}` is not strictly positive")]
    NonPositiveVariance(String),
    #[error("graph: negative edge weight {weight} at ({row},{col})")]
    NegativeWeight { row: usize, col: usize, weight: f64 },
    #[error("hclust: dissimilarity matrix is not symmetric at ({0},{1})")]
    NotSymmetric(usize, usize),
    #[error("treedist: trees do not share the same leaf set")]
    LeafSetMismatch,
    #[error("newick: {msg} at byte {pos}")]
    Newick { pos: usize, msg: String },
    #[error("config: line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidParameter(_) | Error::Config { .. } => ErrorClass::Usage,
            Error::ZeroVariance(_)
            | Error::InsufficientObservations { .. }
            | Error::Singular { .. }
            | Error::NonFinite { .. }
            | Error::NonPositiveVariance(_) => ErrorClass::Numerical,
            _ => ErrorClass::Data,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

/// Shorthand for a usage error.
pub fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
