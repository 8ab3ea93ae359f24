use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid neuron: {0}")]
    InvalidNeuron(String),

    #[error("exact Shapley enumeration supports at most {max} inputs, got {n}")]
    TooManyInputs { n: usize, max: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("backward called before forward")]
    NotForwarded,

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("{path}: {message} (at byte offset {offset})")]
    Idx {
        path: PathBuf,
        offset: u64,
        message: String,
    },

    #[error("data error: {0}")]
    Data(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the `shapnet` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidArgument(_) | Error::Json(_) => 2,
            Error::Idx { .. }
            | Error::Data(_)
            | Error::Checkpoint(_)
            | Error::Io(_)
            | Error::Csv(_) => 3,
            Error::NonFinite(_) => 4,
            Error::InvalidNeuron(_)
            | Error::TooManyInputs { .. }
            | Error::Shape(_)
            | Error::NotForwarded => 2,
        }
    }
}
