use std::path::PathBuf;

use infofit_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("infeasible architecture: violates {}", .0.join(", "))]
    Infeasible(Vec<String>),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed file {}: {message}", .path.display())]
    Format { path: PathBuf, message: String },
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    /// 0 success, 2 configuration, 3 infeasible or degenerate input,
    /// 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } | CliError::Format { .. } => 2,
            CliError::Infeasible(_) => 3,
            CliError::Core(e) => match e {
                CoreError::DegenerateInput(_) | CoreError::EmptyEvidence => 3,
                CoreError::Numerical(_) => 4,
                CoreError::Shape(_) | CoreError::InvalidArgument(_) | CoreError::NotIncremental(_) => 2,
            },
        }
    }
}
