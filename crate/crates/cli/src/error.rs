use std::path::PathBuf;

use loggas_core::samples_io::SamplesIoError;

use crate::config::SchemaError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config:\n{}", list(.0))]
    Schema(Vec<SchemaError>),

    #[error(transparent)]
    Numeric(#[from] loggas_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Samples {
        path: PathBuf,
        source: SamplesIoError,
    },
}

fn list(errors: &[SchemaError]) -> String {
    errors.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n")
}

impl CliError {
    pub fn schema(key: &str, message: impl Into<String>) -> Self {
        CliError::Schema(vec![SchemaError {
            key: key.into(),
            message: message.into(),
        }])
    }

    /// 1 for config problems, 2 for numerical failures, 3 for file trouble.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Io { .. } | CliError::Samples { .. } => 3,
        }
    }
}
