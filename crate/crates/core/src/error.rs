use thiserror::Error;

/// Errors raised by the reduction library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{name} is not symmetric (max asymmetry {asymmetry:.3e})")]
    AsymmetryBeyondTolerance { name: &'static str, asymmetry: f64 },

    #[error("Popov matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    PopovNotPsd { min_eigenvalue: f64 },

    #[error("{0} contains a non-finite entry")]
    NonFinite(&'static str),

    #[error("matrix is not square: {0}")]
    NotSquare(String),

    #[error("columns are not orthonormal (deviation {0:.3e})")]
    NotOrthonormal(f64),

    #[error("state transform is singular")]
    SingularTransform,

    #[error("reduction step not applicable: {0}")]
    NotApplicable(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("no real solution found: {0}")]
    NoRealSolutionFound(String),

    #[error("lifted solution failed verification (residual {residual:.3e}, kernel condition {kernel_ok})")]
    LiftVerificationFailed { residual: f64, kernel_ok: bool },

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    #[error("wrong step kind: {0}")]
    WrongStepKind(String),
}

pub type Result<T> = std::result::Result<T, Error>;
