use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Exit code 1.
    #[error("configuration error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    /// Exit code 2.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Exit code 2: the run completed but a check did not pass.
    #[error("{0}")]
    CheckFailed(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 1,
            CliError::Numerical(_) | CliError::CheckFailed(_) | CliError::Io { .. } => 2,
        }
    }
}

impl From<dirac_lfv_core::Error> for CliError {
    fn from(e: dirac_lfv_core::Error) -> Self {
        CliError::Numerical(e.to_string())
    }
}
