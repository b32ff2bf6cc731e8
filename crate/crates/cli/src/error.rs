use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or out-of-range arguments.
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}, line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: u64,
        msg: String,
    },

    #[error("{path}: {msg}")]
    Data { path: PathBuf, msg: String },

    #[error(transparent)]
    Compute(#[from] imprior_core::Error),

    #[error("writing output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Compute(_) | Self::Output(_) => 1,
            _ => 2,
        }
    }
}

/// Re-labels a core error raised while validating user arguments.
pub(crate) fn bad_arg(e: imprior_core::Error) -> CliError {
    CliError::Usage(e.to_string())
}
