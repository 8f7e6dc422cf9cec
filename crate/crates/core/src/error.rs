//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by matrix calculus, state construction, channels, and
/// divergence evaluation.
///
/// Diagnostic payloads are reported as `f64` regardless of the scalar type
/// the computation ran in.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian: symmetrization residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    NonHermitian { residual: f64, tolerance: f64 },

    #[error("matrix has a genuinely negative eigenvalue {value:.3e} (tolerance {tolerance:.3e})")]
    NegativeEigenvalue { value: f64, tolerance: f64 },

    #[error("matrix is singular or too close to singular (min eigenvalue/singular value {min:.3e})")]
    SingularMatrix { min: f64 },

    #[error("sigma must be strictly positive for these parameters (min eigenvalue {min:.3e})")]
    SingularSigma { min: f64 },

    #[error("operator is not positive semidefinite: min eigenvalue {min_eig:.3e}")]
    NotPsd { min_eig: f64 },

    #[error("trace is {trace} but a density operator must have trace one")]
    TraceNotOne { trace: f64 },

    #[error("Schatten norm requires p >= 1 (or infinity), got {p}")]
    InvalidP { p: f64 },

    #[error("rank must satisfy 1 <= rank <= dim, got rank {rank} for dim {dim}")]
    InvalidRank { rank: usize, dim: usize },

    #[error("regularization strength must lie in (0, 1), got {eps}")]
    InvalidEpsilon { eps: f64 },

    #[error("invalid Kraus family shape: {0}")]
    InvalidShape(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("parameters fall outside the hypothesis of the probed claim: {0}")]
    InvalidRegime(String),

    #[error("exponents must satisfy 1/r0 = 1/r1 + 1/r2, residual {residual:.3e}")]
    ExponentMismatch { residual: f64 },

    #[error("iteration failed to converge: {0}")]
    ConvergenceFailure(String),

    #[error("entries must be finite, found NaN or infinity")]
    NonFiniteEntry,

    #[error("malformed matrix or channel data: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
