use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Shapes or lengths that do not fit together.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry in input")]
    NonFinite,

    /// A problem that would exceed a configured size cap.
    #[error("instance too large: {0}")]
    InstanceTooLarge(String),

    /// Input violating an operation's precondition (e.g. a non-Hermitian
    /// matrix handed to the Hermitian eigensolver).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// Zero vectors, annihilated states and similar.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Invalid family, protocol or cut specification.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    /// Angle at which `P_theta` (cot/tan) is undefined.
    #[error("singular P_theta at theta = {0}")]
    SingularTheta(f64),

    /// Operation requested outside its supported regime.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
