use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{what} missing: {}", path.display())]
    Missing { what: String, path: PathBuf },
    #[error("stage `{stage}` was produced with config {found}, current config is {expected} (use --force to override)")]
    HashMismatch {
        stage: String,
        expected: String,
        found: String,
    },
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Core(#[from] twoscale_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Missing { .. } | CliError::HashMismatch { .. } => 3,
            CliError::Verification(_) => 4,
            CliError::Core(twoscale_core::Error::Config(_)) => 2,
            _ => 1,
        }
    }
}
