//! Error type shared by the whole crate.

use std::path::PathBuf;

/// Everything that can go wrong in this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An image (or mask) has impossible geometry or inconsistent buffers.
    #[error("invalid image: {0}")]
    InvalidImage(String),

    /// A parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Two inputs that must share geometry do not.
    #[error("dimension mismatch: expected {expected_w}x{expected_h}, got {actual_w}x{actual_h}")]
    DimensionMismatch {
        expected_w: usize,
        expected_h: usize,
        actual_w: usize,
        actual_h: usize,
    },

    /// An input that must be non-empty is empty.
    #[error("empty input: {0}")]
    Empty(String),

    /// Training data cannot be used (missing classes, no rows, ragged rows).
    #[error("training data error: {0}")]
    Training(String),

    /// A model file is truncated, corrupt, or from an incompatible version.
    #[error("incompatible model file: {0}")]
    IncompatibleModel(String),

    /// A model was asked to score features it was not trained on.
    #[error("feature fingerprint mismatch: {0}")]
    FingerprintMismatch(String),

    /// Filesystem problem, annotated with the path involved.
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Decoding or encoding an image file failed.
    #[error("image codec error on {path}: {source}")]
    Codec {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

impl Error {
    /// Shorthand for [`Error::Io`].
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
