use std::path::PathBuf;

use binormal::ErrorKind;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid value for `{field}`: {message}")]
    Config { field: &'static str, message: String },

    #[error("cannot read config file {path}: {message}")]
    ConfigFile { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] binormal::Error),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{failed} of {total} properties failed")]
    Verify { failed: usize, total: usize },
}

impl CliError {
    pub fn config(field: &'static str, message: impl Into<String>) -> Self {
        CliError::Config { field, message: message.into() }
    }

    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config { .. } | CliError::ConfigFile { .. } => "config",
            CliError::Core(e) => match e.kind() {
                ErrorKind::Config => "config",
                ErrorKind::Divergence => "divergence",
                ErrorKind::Domain => "domain",
            },
            CliError::Io { .. } => "io",
            CliError::Verify { .. } => "domain",
        }
    }

    /// 2 config, 3 divergence, 4 domain, 5 I/O.
    pub fn exit_code(&self) -> u8 {
        match self.category() {
            "config" => 2,
            "divergence" => 3,
            "domain" => 4,
            _ => 5,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
