//! Command failures and their process exit codes.

use std::path::{Path, PathBuf};

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Invalid configuration or command-line usage (exit code 1).
    #[error("configuration error: {0}")]
    Config(String),

    /// Numerical failure such as a diverging trajectory (exit code 2).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// File could not be read, written or parsed (exit code 3).
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: &Path, message: impl ToString) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }

    /// Malformed content at a 1-based line of an input file.
    pub fn parse(path: &Path, line: usize, message: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            message: format!("line {line}: {message}"),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io { .. } => 3,
        }
    }

    /// Wraps a core error, prefixing the config section it arose in.
    pub fn from_core(section: &str, e: optohopf_core::Error) -> Self {
        use optohopf_core::Error as E;
        match e {
            E::Divergence { .. } | E::NormalizationMismatch { .. } | E::Demodulation(_) => {
                CliError::Numerical(format!("[{section}] {e}"))
            }
            E::InvalidParameter { name, reason } => {
                CliError::Config(format!("invalid key `{section}.{name}`: {reason}"))
            }
            _ => CliError::Config(format!("[{section}] {e}")),
        }
    }
}

/// Attaches the config section to core results.
pub(crate) trait InSection<T> {
    fn in_section(self, section: &str) -> Result<T>;
}

impl<T> InSection<T> for optohopf_core::Result<T> {
    fn in_section(self, section: &str) -> Result<T> {
        self.map_err(|e| CliError::from_core(section, e))
    }
}
