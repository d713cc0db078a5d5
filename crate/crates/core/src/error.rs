use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    DimensionMismatch {
        expected: usize,
        actual: usize,
        context: &'static str,
    },

    #[error("calibration entry for antenna {antenna} has magnitude {magnitude:e}, below floor {floor:e}")]
    DeadAntenna { antenna: usize, magnitude: f64, floor: f64 },

    #[error("zero-norm channel vector")]
    ZeroNorm,

    #[error("index {index} out of range 0..{len} ({context})")]
    OutOfRange {
        index: usize,
        len: usize,
        context: &'static str,
    },

    #[error("checksum mismatch for location `{location}`: expected {expected:016x}, computed {actual:016x}")]
    Checksum {
        location: String,
        expected: u64,
        actual: u64,
    },

    #[error("unsupported schema version {found} (supported: {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("unknown location `{0}`")]
    UnknownLocation(String),

    #[error("manifest parse error: {0}")]
    Manifest(String),

    #[error("eigendecomposition failed: {0}")]
    Numerical(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the filesystem rather than by the inputs.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
