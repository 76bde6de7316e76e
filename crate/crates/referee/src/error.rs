use thiserror::Error;

pub type Result<T> = std::result::Result<T, RefereeError>;

#[derive(Debug, Error)]
pub enum RefereeError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed message: {0}")]
    Malformed(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("timed out: {0}")]
    Timeout(String),

    #[error("connection closed by {0}")]
    ConnectionClosed(String),

    /// The peer sent an `error` message.
    #[error("peer reported: {0}")]
    Remote(String),

    #[error(transparent)]
    Core(#[from] telepathy_core::Error),

    #[error("replay mismatch at round {round}: {reason}")]
    ReplayMismatch { round: u64, reason: String },

    #[error("config: {0}")]
    Config(String),
}
