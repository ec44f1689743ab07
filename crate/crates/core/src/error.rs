use alloc::string::String;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operator is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("operator has non-finite entries")]
    NonFinite,
    #[error("operator is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("invalid density operator: {0}")]
    InvalidDensity(String),
    #[error("operator is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("instrument is not trace preserving (deviation {deviation:e})")]
    NotTracePreserving { deviation: f64 },
    #[error("map for outcome {outcome} is not completely positive (Choi eigenvalue {eigenvalue:e})")]
    NotCompletelyPositive { outcome: f64, eigenvalue: f64 },
    #[error("effect for outcome {outcome} is not positive (eigenvalue {eigenvalue:e})")]
    NotPositive { outcome: f64, eigenvalue: f64 },
    #[error("outcome labels must be distinct: {0} repeats")]
    DuplicateOutcome(f64),
    #[error("outcome {0} is not an outcome of this instrument")]
    UnknownOutcome(f64),
    #[error("zero-probability condition (probability {probability:e})")]
    ZeroProbability { probability: f64 },
    #[error("observables do not commute in the given state (residual {residual:e})")]
    NotCommuting { residual: f64 },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = core::result::Result<T, Error>;
