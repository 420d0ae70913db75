use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid body: {0}")]
    InvalidBody(String),

    /// Adaptive quadrature ran out of its subdivision budget.
    #[error("quadrature did not converge: value {value:e}, error estimate {error:e} (requested {requested:e})")]
    NonConvergence {
        value: f64,
        error: f64,
        requested: f64,
    },

    #[error("invalid movement: {0}")]
    InvalidMovement(String),

    /// A sampled normalized volume left [0, 1]; always indicates a hull bug.
    #[error("normalized volume {value} outside [0, 1] in replication {replication}")]
    VolumeOutOfRange { value: f64, replication: u64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
