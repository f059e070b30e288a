use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Shapes or hyperparameters that cannot describe a valid computation.
    #[error("configuration error: {0}")]
    Config(String),

    /// A value outside the domain the operation accepts (e.g. class index).
    #[error("input error: {0}")]
    Input(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("schema error in {path}: {message}")]
    Schema { path: PathBuf, message: String },

    /// Nothing left of a recording after inactive spans were trimmed.
    #[error("recording {0} has no active span")]
    EmptyRecording(String),

    /// An experiment cell without enough windows to train and test on.
    #[error("empty cell {0}")]
    EmptyCell(String),

    #[error("stratification error: {0}")]
    Stratification(String),

    #[error("training diverged at epoch {epoch}: mean loss {loss}")]
    Divergence { epoch: usize, loss: f64 },

    #[error("all {0} training runs diverged")]
    AllRunsDiverged(usize),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
