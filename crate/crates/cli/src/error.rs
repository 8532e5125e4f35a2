use std::path::{Path, PathBuf};

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INPUT: i32 = 1;
    pub const INCOMPLETE: i32 = 2;
    pub const CAPACITY: i32 = 3;
    pub const BUDGET: i32 = 4;
    pub const VERIFY: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    /// Malformed or invalid content of a named input.
    #[error("{}: {source}", path.display())]
    Input {
        path: PathBuf,
        source: vqspec_core::Error,
    },

    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Core(#[from] vqspec_core::Error),

    #[error("{0}")]
    Budget(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn input(path: &Path, source: vqspec_core::Error) -> Self {
        CliError::Input {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use vqspec_core::Error as E;
        match self {
            CliError::Input {
                source: E::Capacity { .. },
                ..
            }
            | CliError::Core(E::Capacity { .. }) => exit::CAPACITY,
            CliError::Budget(_) => exit::BUDGET,
            _ => exit::INPUT,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
