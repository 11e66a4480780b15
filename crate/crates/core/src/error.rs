use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("xml parse error at {line}:{column}: {message}")]
    Xml {
        line: u32,
        column: u32,
        message: String,
    },

    #[error("missing element `{0}` in VOC document")]
    MissingElement(String),

    #[error("yolo label line {index}: {message}")]
    YoloLine { index: usize, message: String },

    #[error("unmapped code {0}")]
    UnmappedClass(i64),

    #[error("unknown damage class `{0}`")]
    UnknownClass(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("backend `{backend}` failed: {message}")]
    Backend { backend: String, message: String },

    #[error("manifest line {line}: {source}")]
    Manifest {
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error("weights fixture: {0}")]
    Fixture(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
