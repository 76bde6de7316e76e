use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("promise violated: {0}")]
    PromiseViolation(String),

    /// A numerical self-check failed (probabilities not summing to one and the like).
    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("gave up after {attempts} attempts")]
    RetryExhausted { attempts: u32 },

    #[error("protocol error: {0}")]
    Protocol(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
