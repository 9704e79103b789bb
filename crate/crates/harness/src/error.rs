use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {message}")]
    Asset { path: PathBuf, message: String },

    #[error("model: {0}")]
    Model(#[from] xai_core::LoadError),

    #[error(transparent)]
    Core(#[from] xai_core::Error),
}

impl HarnessError {
    pub fn asset(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        HarnessError::Asset {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => 1,
            HarnessError::Asset { .. } => 2,
            HarnessError::Model(_) => 3,
            HarnessError::Core(xai_core::Error::Argument(_)) => 1,
            HarnessError::Core(xai_core::Error::Inference(_) | xai_core::Error::Load(_)) => 3,
            HarnessError::Core(_) => 2,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
