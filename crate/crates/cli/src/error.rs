use std::path::PathBuf;

use cubesum::{DescentError, FieldError, LValueError, LatticeError, OracleError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("verification mismatch: {0}")]
    Mismatch(String),
    #[error("{0}")]
    Precision(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// 1 mismatch, 2 usage, 3 precision or certification failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Mismatch(_) => 1,
            CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Precision(_) => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<LValueError> for CliError {
    fn from(e: LValueError) -> Self {
        match e {
            LValueError::UnsupportedPrime(_) | LValueError::UnsupportedShape(_) | LValueError::Eisenstein(_) => {
                CliError::Usage(e.to_string())
            }
            LValueError::NormalizationMismatch { .. } => CliError::Mismatch(e.to_string()),
            LValueError::Oracle(o) => o.into(),
            _ => CliError::Precision(e.to_string()),
        }
    }
}

impl From<LatticeError> for CliError {
    fn from(e: LatticeError) -> Self {
        match e {
            LatticeError::PrecisionTooLow(_) => CliError::Usage(e.to_string()),
            _ => CliError::Precision(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::UnsupportedN(_) => CliError::Usage(e.to_string()),
            _ => CliError::Precision(e.to_string()),
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        match e {
            FieldError::Unsupported(_) => CliError::Usage(e.to_string()),
            _ => CliError::Precision(e.to_string()),
        }
    }
}

impl From<DescentError> for CliError {
    fn from(e: DescentError) -> Self {
        match e {
            DescentError::UnsupportedPrime(_) | DescentError::PrimeMismatch { .. } => CliError::Usage(e.to_string()),
            DescentError::SignDisagreement { .. } => CliError::Mismatch(e.to_string()),
            DescentError::Oracle(o) => o.into(),
        }
    }
}
