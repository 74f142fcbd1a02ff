use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{path}: {source}")]
    Input { path: PathBuf, source: mpc_emst::Error },

    #[error(transparent)]
    Core(#[from] mpc_emst::Error),

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 1 for IO and unreadable input, 2 for usage, 3 for internal consistency.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } | CliError::Input { .. } | CliError::Csv(_) => 1,
            CliError::Core(e) => match e {
                mpc_emst::Error::InvalidArgument(_) => 2,
                mpc_emst::Error::Consistency { .. } => 3,
                mpc_emst::Error::Parse { .. } | mpc_emst::Error::Io(_) => 1,
            },
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}
