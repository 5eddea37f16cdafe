use std::path::PathBuf;

use thiserror::Error;

/// Errors produced across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("invalid probabilities: {0}")]
    InvalidProbabilities(String),

    #[error("invalid returns: {0}")]
    InvalidReturns(String),

    #[error("invalid support bounds: a={a}, b={b}")]
    InvalidBounds { a: f64, b: f64 },

    #[error("reference point {0} is not on the benchmark return grid")]
    ReferenceNotOnGrid(f64),

    #[error("benchmark returns must be sorted ascending")]
    BenchmarkNotSorted,

    #[error("invalid threshold {name}={value}, expected a value in [0, 1]")]
    InvalidThreshold { name: &'static str, value: f64 },

    #[error("invalid utility: {0}")]
    InvalidUtility(String),

    #[error("invalid probability weighting function: {0}")]
    InvalidPwf(String),

    #[error("value {value} lies outside the utility domain [{a}, {b}]")]
    OutsideDomain { value: f64, a: f64, b: f64 },

    #[error("dominance holds; no violating utility exists")]
    DominanceHolds,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("solver unavailable: {0}")]
    SolverUnavailable(String),

    #[error("solver failed: {0}")]
    SolverFailed(String),

    #[error("certification requires an optimal outcome, got {0}")]
    NotOptimal(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{0}")]
    Data(String),

    #[error("insufficient data: {needed} months needed, {available} available")]
    InsufficientData { needed: usize, available: usize },

    #[error("empty path")]
    EmptyPath,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
