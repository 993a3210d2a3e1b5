use thiserror::Error;

/// Failure classes, each with its own exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("bad flag: {0}")]
    BadFlag(String),
    #[error("io: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::BadInput(_) => 2,
            CliError::BadFlag(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn input(e: impl std::fmt::Display) -> Self {
        CliError::BadInput(e.to_string())
    }

    pub fn flag(e: impl std::fmt::Display) -> Self {
        CliError::BadFlag(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
