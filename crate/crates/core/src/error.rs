use thiserror::Error;

/// Errors raised by the operator, bracket, reduction and dynamics layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix must have dimension >= 1")]
    EmptyMatrix,

    #[error("matrix data has {len} entries, expected {expected}")]
    BadShape { len: usize, expected: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("singular value decomposition did not converge")]
    SvdNoConvergence,

    #[error("eigenvalue iteration did not converge")]
    EigenNoConvergence,

    #[error("state violates the {0} tag")]
    TagViolation(&'static str),

    #[error("invalid decomposition of unity: {0}")]
    InvalidDecomposition(String),

    #[error("invalid reduction operator: {0}")]
    InvalidReduction(String),

    #[error("linear map is not idempotent (defect {0:e})")]
    NotIdempotent(f64),

    #[error("not applicable: {0}")]
    NotApplicable(&'static str),

    #[error("matrix is singular or ill-conditioned (condition estimate {0:e})")]
    IllConditioned(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical overflow: {0}")]
    Overflow(String),

    #[error("non-finite state produced at step {step} (t = {time})")]
    NonFiniteState { step: usize, time: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
