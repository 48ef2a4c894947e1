use thiserror::Error;

/// Errors shared across the crate.
///
/// Precision errors are never silent: any predicate that would have to look
/// at coefficients beyond a series' authoritative range reports
/// `InsufficientPrecision` instead of guessing.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("operands belong to different fields")]
    MismatchedField,

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid a-vector {0:?} for these parameters")]
    InvalidAVector(Vec<i64>),

    #[error("candidate budget of {0} evaluations exceeded")]
    BudgetExceeded(u64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
