use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by an expression that normalizes to zero")]
    DivisionByZero,
    #[error("chart mismatch: {0}")]
    ChartMismatch(String),
    #[error("unsupported algebraic form: {0}")]
    Unsupported(String),
    #[error("substitution does not cover {0}")]
    PartialMap(String),
    #[error("exceptional weight: {0}")]
    ExceptionalWeight(String),
    #[error("operator is not homogeneous in weight")]
    NonHomogeneous,
    #[error("not invertible: {0}")]
    NotInvertible(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("parity error: {0}")]
    Parity(String),
    #[error("invalid transition: {0}")]
    Transition(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
