use thiserror::Error;

/// Errors produced by the homsol pipelines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("invalid dimension n = {0}")]
    InvalidDimension(usize),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("matrix is not symmetric positive definite (eigenvalues in [{min_eigenvalue:e}, {max_eigenvalue:e}])")]
    NotSpd { min_eigenvalue: f64, max_eigenvalue: f64 },

    #[error("polynomial is not homogeneous")]
    NotHomogeneous,

    #[error("declared degree {declared} does not match polynomial degree {actual}")]
    DegreeMismatch { declared: f64, actual: u32 },

    #[error("evaluation too close to the origin (|x| = {norm:e})")]
    OriginEvaluation { norm: f64 },

    #[error("expected a unit vector, got |theta| = {norm}")]
    NotUnitVector { norm: f64 },

    #[error("operator is not elliptic at 0: smallest eigenvalue of DF(0) is {min_eigenvalue:e}")]
    NotElliptic { min_eigenvalue: f64 },

    #[error("operator is not C1 at 0: difference quotients disagree by {discrepancy:e}")]
    NonC1AtZero { discrepancy: f64 },

    #[error("degree d = 2 is not covered by the classification (homogeneous degree-2 solutions are excluded)")]
    DegreeTwoUnsupported,

    #[error("grid resolution too low: {0}")]
    ResolutionTooLow(String),

    #[error("grid with {size} points is too large for the dense eigensolver (limit {limit})")]
    GridTooLargeForDense { size: usize, limit: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
}

impl Error {
    pub(crate) fn parse(position: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            position,
            message: message.into(),
        }
    }

    /// True for errors that come from the classification itself rather than
    /// from malformed input.
    pub fn is_classification_error(&self) -> bool {
        matches!(
            self,
            Error::DegreeTwoUnsupported | Error::NotElliptic { .. } | Error::NonC1AtZero { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
