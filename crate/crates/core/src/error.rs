use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input shape mismatch: expected length {expected}, got {actual}")]
    InputShape { expected: usize, actual: usize },

    #[error("target has {actual} entries but task {task} produces {expected} outputs")]
    TargetShape {
        task: usize,
        expected: usize,
        actual: usize,
    },

    #[error("unknown task id {0}")]
    UnknownTask(usize),

    #[error("unknown track `{0}`")]
    UnknownTrack(String),

    #[error("unknown configuration `{0}`")]
    UnknownConfig(String),

    #[error("dataset for task {0} is empty")]
    EmptyDataset(usize),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("non-finite training loss on task {task} at epoch {epoch}")]
    NonFiniteLoss { task: usize, epoch: usize },

    #[error("invalid hyperparameter: {0}")]
    InvalidConfig(String),

    #[error("could not generate a label-balanced dataset for {track} task {task}")]
    Unbalanced { track: String, task: usize },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
