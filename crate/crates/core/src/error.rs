use thiserror::Error;

/// Errors raised by oracles, estimators, subproblem solvers and drivers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("oracle contract violated: {0}")]
    Contract(String),
    #[error("query budget {required:.3e} exceeds cap {cap:.3e}")]
    BudgetExceeded { required: f64, cap: f64 },
    #[error("degenerate instance: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
