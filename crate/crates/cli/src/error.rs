use std::path::{Path, PathBuf};
use std::process::ExitCode;

use coordmech::io::SCHEMA;
use coordmech::GameError;
use serde_json::json;

pub const EXIT_CLAIM_FAILED: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;
pub const EXIT_INPUT: u8 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("writing output: {0}")]
    Output(#[from] std::io::Error),
    #[error("unknown reproduce target {0:?}; expected one of {targets}", targets = crate::reproduce::TARGETS.join(", "))]
    TargetUnknown(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Game(e) => e.code(),
            CliError::Io { .. } => "IO_ERROR",
            CliError::Output(_) => "IO_ERROR",
            CliError::TargetUnknown(_) => "TARGET_UNKNOWN",
            CliError::Usage(_) => "USAGE",
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Game(e) if e.is_budget() => ExitCode::from(EXIT_BUDGET),
            _ => ExitCode::from(EXIT_INPUT),
        }
    }

    /// One-line JSON error record for stderr.
    pub fn record(&self) -> String {
        json!({
            "schema": SCHEMA,
            "error": { "code": self.code(), "message": self.to_string() },
        })
        .to_string()
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.into())
    }
}
