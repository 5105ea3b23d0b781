use thiserror::Error;

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const GATE_FAILED: i32 = 2;
    pub const INVALID_RUN: i32 = 3;
    pub const INVALID_CONFIG: i32 = 64;
    pub const IO_ERROR: i32 = 74;
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(String),

    #[error(transparent)]
    Core(#[from] trapflow::error::Error),
}

impl HarnessError {
    /// Core errors come from parameters the config supplied, so they share
    /// the config exit code.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Io(_) => exit::IO_ERROR,
            HarnessError::Config(_) | HarnessError::Core(_) => exit::INVALID_CONFIG,
        }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}
