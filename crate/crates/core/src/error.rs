use thiserror::Error;

/// Errors raised by the sensor placement library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix `{0}` is not positive definite")]
    NotPositiveDefinite(String),

    #[error("measurement noise standard deviation must be positive, got {0}")]
    NonPositiveSigma(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("process noise is zero; use the reduced zero-process-noise path")]
    ZeroProcessNoise,

    #[error("Cholesky factorization failed for `{0}` (numerically indefinite)")]
    CholeskyFailure(String),

    #[error("invalid coupling {coupling}: coupling times max degree ({degree}) must lie in (0, 1)")]
    InvalidCoupling { coupling: f64, degree: usize },

    #[error("invalid sensor set: {0}")]
    InvalidSensorSet(String),

    #[error("invalid budget: {0}")]
    InvalidBudget(String),

    #[error("budget {budget} is not above the full-placement value {full}")]
    DegenerateBudget { budget: f64, full: f64 },

    #[error("spectral norm bound mu = {0} is (numerically) 1; the bounds exclude this case")]
    MuEqualsOne(f64),

    #[error("no finite observation interval reaches the requested error with this many sensors")]
    InfeasibleAlpha,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no subset meets the budget {0}")]
    Infeasible(f64),

    #[error("instance too large for exhaustive enumeration: n = {n} exceeds cap {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("malformed system description: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
