use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration or scenario value is out of its admissible range.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Rejection sampling gave up.
    #[error(
        "scenario generation failed after {attempts} attempts: {constraint} could not be satisfied"
    )]
    Generation {
        constraint: &'static str,
        attempts: usize,
    },

    /// The caller used the environment out of order.
    #[error("usage error: {0}")]
    Usage(String),

    /// An episode log could not be interpreted.
    #[error("malformed episode log: {0}")]
    Log(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
