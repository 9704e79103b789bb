use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid dimensions {width}x{height}: both must be at least 1")]
    InvalidDimension { width: u32, height: u32 },

    #[error("invalid stroke: {0}")]
    InvalidStroke(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: String, actual: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid mask: {0}")]
    InvalidMask(String),

    #[error("image decode failed: {0}")]
    Decode(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error(transparent)]
    Load(#[from] LoadError),

    #[error("inference failed: {0}")]
    Inference(String),
}

impl Error {
    pub(crate) fn shape(expected: impl ToString, actual: impl ToString) -> Self {
        Error::Shape {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }
}

/// Failures while loading model weights or the label table.
#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("model shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("label table has {found} entries, expected {expected}")]
    LabelCount { expected: usize, found: usize },

    #[error("cannot read {}: {message}", path.display())]
    Io { path: PathBuf, message: String },

    #[error("model backend rejected {}: {message}", path.display())]
    Backend { path: PathBuf, message: String },
}
