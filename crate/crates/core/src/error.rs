use thiserror::Error;

/// Errors raised by the linear algebra kernels, deflation setup and analysis tools.
///
/// Solver outcomes such as breakdown or stagnation are not errors; they are
/// reported through [`crate::solvers::Status`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not Hermitian positive definite")]
    NotPositiveDefinite,

    #[error("singular system: pivot {pivot:.3e} below threshold {threshold:.3e}")]
    SingularSystem { pivot: f64, threshold: f64 },

    #[error("coupling matrix E_B is singular: pivot {pivot:.3e} below threshold {threshold:.3e}")]
    SingularCoupling { pivot: f64, threshold: f64 },

    #[error("deflation basis must have 0 < k < N columns, got k={k}, N={n}")]
    InvalidBasisSize { k: usize, n: usize },

    #[error("deflation basis is rank deficient")]
    RankDeficient,

    #[error("operation requires {expected} mode")]
    ModeMismatch { expected: &'static str },

    #[error("operator declared Hermitian failed probe check (violation {violation:.3e})")]
    HermitianProbeFailed { violation: f64 },

    #[error("indefinite curvature p^H A p = {curvature:.3e} encountered in CG")]
    IndefiniteDetected { curvature: f64 },

    #[error("invalid breakdown guess: {reason}")]
    GuessInvalid { reason: String },

    #[error("subspace is not invariant (residual {residual:.3e})")]
    NotInvariant { residual: f64 },

    #[error("spectrum verification failed (max mismatch {mismatch:.3e}, tolerance {tolerance:.3e})")]
    VerificationFailed { mismatch: f64, tolerance: f64 },

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
