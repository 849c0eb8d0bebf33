use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical error: {0}")]
    Numerical(biphoton::Error),

    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::VerificationFailed(_) => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<biphoton::Error> for CliError {
    fn from(e: biphoton::Error) -> Self {
        use biphoton::Error::*;
        match e {
            InvalidParams(_) | InvalidConfig(_) | InvalidGrid(_) | RankTooLarge { .. } | ZeroRank => {
                CliError::Config(e.to_string())
            }
            other => CliError::Numerical(other),
        }
    }
}
