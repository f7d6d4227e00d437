use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("symbol is not finite at frequency {frequency:?}")]
    InvalidSymbol { frequency: Vec<i64> },

    #[error("order alpha = {alpha} is not admissible for p = {p}: need alpha integer or alpha > {bound}")]
    Admissibility { alpha: f64, p: String, bound: f64 },

    #[error("band sigma = {sigma} exceeds the grid Nyquist frequency {nyquist}")]
    AboveNyquist { sigma: f64, nyquist: f64 },

    #[error("period too small for '{name}': tail bound {tail:e} exceeds {limit:e}")]
    PeriodTooSmall { name: String, tail: f64, limit: f64 },

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("unsupported parameter: {0}")]
    Unsupported(String),

    #[error("hypothesis error for {property}: {condition}")]
    Hypothesis { property: String, condition: String },

    #[error("no branch of the eta table applies: {}", failed.join("; "))]
    Regime { failed: Vec<String> },

    #[error("curve does not cover the integration range: {0}")]
    Coverage(String),

    #[error("unknown corpus entry '{0}'")]
    UnknownEntry(String),
}

pub type Result<T> = std::result::Result<T, Error>;
