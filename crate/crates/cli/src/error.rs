use netsirs_core::Error as CoreError;

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Failure classes with their process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Malformed or inconsistent configuration, detected before computing.
    #[error("configuration error: {0}")]
    Config(String),
    /// A solver failed on a valid configuration.
    #[error("numerical failure: {0}")]
    Numerical(#[from] CoreError),
    #[error("i/o error on {path}: {msg}")]
    Io { path: String, msg: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io { .. } => 2,
            Self::Numerical(_) => 3,
        }
    }

    pub(crate) fn config(e: impl std::fmt::Display) -> Self {
        Self::Config(e.to_string())
    }

    pub(crate) fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        Self::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        }
    }
}
