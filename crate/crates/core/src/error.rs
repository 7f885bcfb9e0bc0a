use thiserror::Error;

/// Errors produced by the generator and its analysis machinery.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("insufficient seed entropy: need {needed} bits, have {available}")]
    InsufficientSeed { needed: u128, available: u128 },

    #[error("index {index} exceeds field modulus {modulus}")]
    IndexExceedsField { index: u64, modulus: String },

    #[error("modulus {0} is not prime")]
    NotPrime(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
