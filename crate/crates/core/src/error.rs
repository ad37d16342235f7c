use thiserror::Error;

/// Errors produced by the library. The CLI maps each kind onto an exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed input: dimension mismatch, broken invariant, out-of-range parameter.
    #[error("validation error: {0}")]
    Validation(String),

    /// A configurable safety cap was exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// An iterative routine failed to converge or a system was too ill-conditioned.
    #[error("numeric error: {message} (residual {residual:e})")]
    Numeric { message: String, residual: f64 },

    /// The requested operation is not defined for this input.
    #[error("unsupported: {0}")]
    Capability(String),

    /// A formula was evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An internal contract was violated.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>, residual: f64) -> Self {
        Error::Numeric {
            message: msg.into(),
            residual,
        }
    }
}
