use thiserror::Error;

/// Errors surfaced by the model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime {0} is outside the supported range 2..=32768")]
    PrimeOutOfRange(u64),
    #[error("division by zero in the residue field")]
    DivisionByZero,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("gram matrix is degenerate")]
    Degenerate,
    #[error("gram matrix does not define a {0} form")]
    NotSesquilinear(&'static str),
    #[error("index {index} out of range 0..{len}")]
    IndexOutOfRange { index: u64, len: u64 },
    #[error("field parameters do not match")]
    FieldMismatch,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("stratum count {count} exceeds the cap {cap}")]
    CountCapExceeded { count: String, cap: u128 },
    #[error("norm bound {bound} lies beyond the place model horizon {horizon}")]
    BeyondHorizon { bound: f64, horizon: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
