use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates one of its invariants.
    #[error("invalid config `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Replay buffer holds fewer transitions than requested.
    #[error("replay buffer not ready: {have} stored, {need} required")]
    NotReady { have: usize, need: usize },

    #[error("cache was produced by a different parameter version ({cache} vs {params})")]
    StaleCache { cache: u64, params: u64 },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field,
            reason: reason.into(),
        }
    }
}
