use thiserror::Error;

/// Errors produced by the subspace, operator, spectral and solver routines.
#[derive(Debug, Error)]
pub enum GapError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,

    #[error("principal angles are undefined for a zero-dimensional subspace")]
    ZeroDimensionalSubspace,

    #[error("basis is not orthonormal (max deviation {0:e})")]
    NotOrthonormal(f64),

    #[error("angle {value} outside of the admissible range {range}")]
    AngleOutOfRange { value: f64, range: &'static str },

    #[error("{method} requires {angle}")]
    MissingAngle {
        method: &'static str,
        angle: &'static str,
    },

    #[error("inconsistent dimensions: {0}")]
    InconsistentDimensions(String),

    #[error("dense eigensolver did not converge")]
    Eigensolver,

    #[error("subdominant magnitude {0} is not below one; iteration does not converge")]
    NotConvergent(f64),

    #[error("need at least {needed} positive residuals after burn-in, found {found}")]
    InsufficientTrace { needed: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = GapError> = std::result::Result<T, E>;
