use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}, line {line}: {reason}")]
    Parse { path: PathBuf, line: u64, reason: String },
    #[error("{path}: header `{header}` does not match record schema {expected}")]
    SchemaVersion { path: PathBuf, expected: &'static str, header: String },
    #[error("numerical failure: {0}")]
    Numerical(#[source] mdst_core::Error),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// Process exit code: 2 configuration, 3 I/O and record files,
    /// 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Io { .. } | Self::Parse { .. } | Self::SchemaVersion { .. } => 3,
            Self::Numerical(_) => 4,
        }
    }
}

impl From<mdst_core::Error> for HarnessError {
    fn from(e: mdst_core::Error) -> Self {
        use mdst_core::Error as E;
        match e {
            E::InvalidParameter { .. }
            | E::UnsupportedDimension { .. }
            | E::DimensionMismatch { .. }
            | E::CoordinateOutOfRange { .. }
            | E::OriginPoint { .. }
            | E::DuplicatePoint { .. } => Self::Config(e.to_string()),
            _ => Self::Numerical(e),
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
