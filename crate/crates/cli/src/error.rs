use std::path::PathBuf;

use manakov_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 0 ok, 1 I/O, 2 invalid spec, 3 integrator failure, 4 construction refused.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Spec(_) => 2,
            CliError::Io { .. } => 1,
            CliError::Core(e) => match e {
                CoreError::IntegratorFailure { .. } => 3,
                CoreError::NoRealEigenvalue | CoreError::ZeroTangent | CoreError::OutsideStableRegion(_) => 4,
                CoreError::Io(_) | CoreError::Csv(_) | CoreError::Json(_) => 1,
                _ => 2,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
