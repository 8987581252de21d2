use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Problems reading or validating a scenario file.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("{0}")]
    Parse(String),

    #[error("line {line}: invalid `{field}`: {message}")]
    Invalid { field: String, line: usize, message: String },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),

    #[error(transparent)]
    Model(#[from] derivex_core::Error),

    #[error("scan needs at least two instruments to define exposure angles (scenario has {0})")]
    TooFewInstruments(usize),

    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("consistency check failed: {0}")]
    Consistency(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 0 success, 2 validation, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Scenario(ScenarioError::Io { .. }) | CliError::Io { .. } => 3,
            CliError::Scenario(_) | CliError::Model(_) | CliError::TooFewInstruments(_) => 2,
            CliError::Consistency(_) => 1,
        }
    }
}
