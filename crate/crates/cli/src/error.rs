use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] tracecalc::Error),

    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// 2 for bad input, 3 for a grade beyond what the engine supports, 1
    /// otherwise (including failed verifications).
    pub fn exit_code(&self) -> u8 {
        use tracecalc::Error as E;
        match self {
            CliError::Usage(_) | CliError::Core(E::Parse(_) | E::InvalidConfig(_) | E::ZeroN) => 2,
            CliError::Core(E::GradeTooLarge { .. } | E::GradeEscape { .. }) => 3,
            _ => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
