use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CbcError {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input violates a structural invariant (ordering, positivity, membership).
    #[error("validation error: {0}")]
    Validation(String),

    /// The request would exceed the enumeration or memory limits.
    #[error("capacity error: {0}")]
    Capacity(String),

    #[error("unsupported smoothness alpha = {0}: closed-form Korobov kernel requires a positive even integer")]
    UnsupportedSmoothness(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub type Result<T> = std::result::Result<T, CbcError>;
