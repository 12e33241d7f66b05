use thiserror::Error;

pub type Result<T> = std::result::Result<T, PpaError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PpaError {
    #[error("relaxation factor must lie in (0, 2), got {0}")]
    InvalidRelaxation(f64),

    #[error("invalid value for {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operator is not monotone: smallest eigenvalue of the symmetric part is {min_eigenvalue}")]
    NotMonotone { min_eigenvalue: f64 },

    #[error("operator matrix is singular or not square")]
    SingularOperator,

    #[error("I + cA is numerically singular for c = {c}")]
    SingularResolvent { c: f64 },

    #[error("non-finite iterate at step {k}")]
    NonFinite { k: usize },

    #[error("not applicable: {0}")]
    NotApplicable(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
