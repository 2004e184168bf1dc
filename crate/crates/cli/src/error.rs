use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical divergence: {0}")]
    Divergence(String),
    #[error("degenerate steady state: {0}")]
    DegenerateSteadyState(String),
    #[error("validation failed: {0}")]
    ValidationFailed(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Engine(bipartite_lindblad::Error),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Divergence(_) => 3,
            CliError::DegenerateSteadyState(_) => 4,
            CliError::ValidationFailed(_) | CliError::Io { .. } | CliError::Engine(_) => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<bipartite_lindblad::Error> for CliError {
    fn from(e: bipartite_lindblad::Error) -> Self {
        use bipartite_lindblad::Error as E;
        match e {
            E::Diverged { .. } => CliError::Divergence(e.to_string()),
            E::DegenerateSteadyState(_) | E::Singular { .. } => CliError::DegenerateSteadyState(e.to_string()),
            E::InvalidParameter { .. } | E::InvalidTruncation(_) | E::SuperoperatorTooLarge { .. } => {
                CliError::Config(e.to_string())
            }
            other => CliError::Engine(other),
        }
    }
}
