use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e} exceeds {allowed:.3e})")]
    NotHermitian { asymmetry: f64, allowed: f64 },

    #[error("matrix is not positive semidefinite (minimum eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("not an effect: spectrum [{min:.3e}, {max:.3e}] leaves [0, 1]")]
    NotAnEffect { min: f64, max: f64 },

    #[error("not a projection (idempotency defect {defect:.3e})")]
    NotAProjection { defect: f64 },

    #[error("not a contraction (operator norm {norm:.6})")]
    NotAContraction { norm: f64 },

    /// `K*K - M*M` is not positive; carries its most negative eigenvalue.
    #[error("ordering violated: most negative eigenvalue {min_eigenvalue:.3e}")]
    OrderViolation { min_eigenvalue: f64 },

    #[error("vector is not normalised (norm {norm:.12})")]
    NotNormalized { norm: f64 },

    #[error("the zero effect has no restricted inverse")]
    ZeroEffect,

    #[error("effects do not sum to the identity (defect {defect:.3e})")]
    NotNormalizedPovm { defect: f64 },

    #[error("unknown outcome label `{0}`")]
    UnknownLabel(String),

    #[error("invalid outcome family: {0}")]
    InvalidFamily(String),

    #[error("invalid dilation: {0}")]
    InvalidDilation(String),

    #[error("marginal mismatch on {which} outcome `{label}` (defect {defect:.3e})")]
    MarginalMismatch {
        which: &'static str,
        label: String,
        defect: f64,
    },

    #[error("observable is not projective: outcome `{0}`")]
    NotProjective(String),

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("feasibility oracle inconclusive: {0}")]
    Inconclusive(String),

    #[error("serialisation: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
