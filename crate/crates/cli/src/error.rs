use std::path::PathBuf;

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] iucorr_core::Error),
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Self::Invalid(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 for failed checks, 2 for bad input, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::ChecksFailed(_) => 1,
            Self::Invalid(_) => 2,
            Self::Io { .. } => 3,
            Self::Core(e) if e.is_io() => 3,
            Self::Core(_) => 2,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(source) => Self::Io {
                path: PathBuf::from("<csv>"),
                source,
            },
            other => Self::Invalid(format!("csv: {other:?}")),
        }
    }
}
