use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("rejection sampler gave up after {attempts} attempts (n = {n}, d = {d}); use the switch chain instead")]
    RejectionBudgetExhausted { n: usize, d: usize, attempts: usize },

    #[error("switch move rows ({i1}, {i2}) cols ({j1}, {j2}) is not admissible")]
    InadmissibleSwitch { i1: usize, i2: usize, j1: usize, j2: usize },

    #[error("enumeration size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("{routine} did not converge after {iterations} iterations")]
    NoConvergence { routine: &'static str, iterations: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("zero vector has no structure")]
    ZeroVector,
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
