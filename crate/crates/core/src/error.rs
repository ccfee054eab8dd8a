use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Inputs outside an operation's documented domain.
    #[error("validation error: {0}")]
    Validation(String),

    /// A construction produced an object that violates its own invariants.
    #[error("construction error: {0}")]
    Construction(String),

    #[error("numerical error: {message} (residual {residual:e})")]
    Numerical { message: String, residual: f64 },

    /// Failure while stepping a broadcast execution.
    #[error("execution error: {0}")]
    Execution(String),

    /// An experiment configuration that cannot be run as written.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// True for the error kinds caused by bad user input rather than by a
    /// failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_) | Error::Config(_) | Error::Parse(_) | Error::Json(_)
        )
    }
}
