use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// A configuration value that cannot be used, with its dotted field path.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("cannot {action} {}: {source}", file.display())]
    Io {
        action: &'static str,
        file: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("numerical rejection: {0}")]
    Numerical(#[from] blochlat::Error),
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl std::fmt::Display) -> Self {
        CliError::Config {
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub fn io(action: &'static str, file: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            action,
            file: file.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => exit::USAGE,
            CliError::Io { .. } => exit::IO,
            CliError::Numerical(_) => exit::NUMERICAL,
        }
    }
}

pub mod exit {
    pub const OK: u8 = 0;
    pub const CHECK_FAILED: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const IO: u8 = 3;
    pub const NUMERICAL: u8 = 4;
}

pub type CliResult<T> = Result<T, CliError>;
