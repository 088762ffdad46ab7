use thiserror::Error;

/// Errors raised by the numerical kernel, state/channel constructors and classifiers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max |M - M^dagger| = {0:e})")]
    NonHermitian(f64),

    #[error("Jacobi eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix dimension {0} exceeds the supported maximum of 64")]
    SizeOverflow(usize),

    #[error("unsupported local dimension {0}")]
    UnsupportedDimension(usize),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("invalid entropy order alpha = {0}")]
    InvalidAlpha(f64),

    #[error("support violation: {0}")]
    SupportViolation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Kraus operators are not trace preserving (max deviation {0:e})")]
    NotTracePreserving(f64),

    #[error("unsupported channel family: {0}")]
    UnsupportedFamily(String),

    #[error("classification verdicts are not monotone in p: {0}")]
    NonMonotone(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
