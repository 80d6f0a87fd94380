use std::fmt;

/// Command failure, split by the exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or invalid input files: exit code 2.
    Input(anyhow::Error),
    /// Training diverged: exit code 3.
    Numerical(anyhow::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn input(msg: impl fmt::Display) -> Self {
        CliError::Input(anyhow::anyhow!("{msg}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(e) => write!(f, "{e:#}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e:#}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<rsl_core::Error> for CliError {
    fn from(e: rsl_core::Error) -> Self {
        match e {
            rsl_core::Error::NonFinite { .. } => CliError::Numerical(e.into()),
            other => CliError::Input(other.into()),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Input(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Input(e.into())
    }
}
