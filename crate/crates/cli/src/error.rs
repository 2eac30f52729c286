use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot read config file {path}: {message}")]
    ConfigFile { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] magicwalk::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 invalid configuration, 3 resource guard, 4 numerical failure.
    pub fn exit_code(&self) -> u8 {
        use magicwalk::Error as E;
        match self {
            CliError::Config(_) | CliError::ConfigFile { .. } => 2,
            CliError::Io { .. } => 1,
            CliError::Core(e) => match e {
                E::ResourceLimit(_) => 3,
                E::Numerical(_) | E::Normalization(_) => 4,
                E::InvalidSpec(_)
                | E::InvalidBasis(_)
                | E::Domain(_)
                | E::Truncation { .. }
                | E::InsufficientData(_)
                | E::EmptyWindow(..)
                | E::Grid(_)
                | E::NoFront { .. } => 2,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
