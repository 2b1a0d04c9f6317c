use std::path::PathBuf;

use thiserror::Error;

#[derive(Error, Debug)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Clap(#[from] clap::Error),

    #[error("cannot read config file {}: {source}", path.display())]
    ConfigRead {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write {}: {source}", path.display())]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] quadtwist::Error),
}

impl CliError {
    /// 0 success, 1 usage, 2 numeric guard, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        use quadtwist::Error as E;
        match self {
            CliError::Usage(_) => 1,
            CliError::Clap(e) => match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            },
            CliError::ConfigRead { .. } | CliError::Output { .. } => 3,
            CliError::Core(e) if e.is_io() => 3,
            CliError::Core(e) if e.is_numeric_guard() => 2,
            // A table too short for the certified tail is a tail-bound failure.
            CliError::Core(E::InsufficientTable { .. } | E::MissingPrime(_) | E::Series(_)) => 2,
            CliError::Core(_) => 1,
        }
    }
}
