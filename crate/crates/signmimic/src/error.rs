use std::path::PathBuf;

/// Crate-wide error type. `exit_code` is the process-level contract:
/// 2 for anything wrong with inputs or configuration, 3 for numerical
/// divergence during simulation or training.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("schema error in {path}: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("non-finite value in {context}")]
    Diverged { context: String },

    #[error("checkpoint does not match run: {0}")]
    CheckpointMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Diverged { .. } => 3,
            _ => 2,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub fn schema(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Schema { path: path.into(), message: msg.into() }
    }
}
