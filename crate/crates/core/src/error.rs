use thiserror::Error;

/// Errors raised anywhere in the solver stack.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("divergent integral: exponent {exponent} must exceed -1")]
    DivergentIntegral { exponent: f64 },

    #[error("singular matrix: zero pivot at column {column}{context}")]
    SingularMatrix { column: usize, context: String },

    #[error("convergence failure: {0}")]
    ConvergenceFailure(String),

    #[error("unsupported expression: {0}")]
    UnsupportedExpression(String),

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("resource limit: {0}")]
    ResourceLimit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
