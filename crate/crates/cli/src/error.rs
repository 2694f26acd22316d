use std::fmt;
use std::path::{Path, PathBuf};

/// Failure of a subcommand, carrying its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or arguments (exit 2).
    Config(String),
    /// Reading or writing files failed (exit 3).
    Io { path: PathBuf, message: String },
    /// Anything else that stopped the command (exit 1).
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Runtime(_) => 1,
            Self::Config(_) => 2,
            Self::Io { .. } => 3,
        }
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            message: err.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(m) => write!(f, "configuration error: {m}"),
            Self::Io { path, message } => write!(f, "{}: {message}", path.display()),
            Self::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<banditnav::Error> for CliError {
    fn from(e: banditnav::Error) -> Self {
        use banditnav::Error as E;
        match e {
            E::Io { path, source } => Self::io(&path, source),
            E::Config(m) | E::InvalidGrid(m) => Self::Config(m),
            other => Self::Runtime(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
