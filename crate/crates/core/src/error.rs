use std::path::PathBuf;

/// Errors raised by the load model, simulator and learner.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("scheduled PRBs {n_prb} exceed the available {max}")]
    PrbOutOfRange { n_prb: u32, max: u32 },

    #[error("{param} = {value} is not a member of the configured set")]
    NotInSet { param: &'static str, value: u32 },

    #[error("fronthaul capacity must be strictly positive")]
    ZeroCapacity,

    #[error("slot records do not cover a complete grid: {0}")]
    IncompleteGrid(String),

    #[error("expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("network architectures differ")]
    ArchitectureMismatch,

    #[error("non-finite loss at training step {step}")]
    NonFiniteLoss { step: u64 },

    #[error("no configuration satisfies the constraint")]
    Infeasible,

    #[error("buffer holds {size} transitions, {requested} requested")]
    BufferUnderfilled { size: usize, requested: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("transition row (state {state}, action {action}) sums to {sum}")]
    NonStochastic { state: usize, action: usize, sum: f64 },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
