use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index {index} out of range (expected < {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("distribution is not pairwise independent")]
    NotPairwiseIndependent,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("enumeration of {required} evaluations exceeds cap {cap}")]
    CapExceeded { required: u128, cap: u128 },

    /// The hypotheses of a proven statement were met but its conclusion was
    /// not reproduced numerically. Always a bug.
    #[error("theorem violation: {0}")]
    TheoremViolation(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
