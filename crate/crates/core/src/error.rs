use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A raster or grid has the wrong size for the requested operation.
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    /// A value lies outside its documented domain (luminance, rate, threshold, ...).
    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("field of view error: {0}")]
    Fov(String),

    #[error("sequence length error: {0}")]
    Length(String),

    #[error("ingestion error: {path}: {reason}")]
    Ingestion { path: PathBuf, reason: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("pipeline error: {0}")]
    Pipeline(String),

    #[error("catalog error: {0}")]
    Catalog(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("image error on {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
