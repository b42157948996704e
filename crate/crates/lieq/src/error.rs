use thiserror::Error;

/// Coarse classification used by callers (e.g. the CLI) to map failures to
/// exit codes: malformed input, violated geometric precondition, or numerics
/// that cannot support a verdict either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Input,
    Precondition,
    Inconclusive,
}

#[derive(Debug, Clone, Error)]
pub enum GeomError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("zero vector cannot represent a projective point")]
    ZeroVector,

    #[error("not on the quadric: relative residual {residual:.3e} exceeds {tol:.3e}")]
    NotOnQuadric { residual: f64, tol: f64 },

    #[error("not a group element: orthogonality residual {residual:.3e}")]
    NotOrthogonal { residual: f64 },

    #[error("not in oriented contact: normalized pairing {pairing:.3e}")]
    NotInContact { pairing: f64 },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("geometric precondition failed: {0}")]
    Precondition(String),

    #[error("inconclusive numerics: {0}")]
    Inconclusive(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl GeomError {
    pub fn category(&self) -> ErrorCategory {
        match self {
            GeomError::InvalidInput(_) | GeomError::DimensionMismatch { .. } => {
                ErrorCategory::Input
            }
            GeomError::Inconclusive(_) => ErrorCategory::Inconclusive,
            _ => ErrorCategory::Precondition,
        }
    }
}

pub type Result<T> = std::result::Result<T, GeomError>;
