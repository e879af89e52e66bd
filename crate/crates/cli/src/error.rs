use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Schema { path: String, msg: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] pce_hinf::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn schema(path: impl Into<String>, msg: impl Into<String>) -> Self {
        CliError::Schema { path: path.into(), msg: msg.into() }
    }

    /// Process exit status by error class.
    pub fn exit_code(&self) -> i32 {
        use pce_hinf::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Schema { .. } => 3,
            CliError::Io { .. } => 4,
            CliError::Core(e) => match e {
                E::Dimension(_) | E::InvalidArgument(_) | E::DegreeOverflow { .. } | E::UnsupportedDistribution(_) => 3,
                E::UnstableSample(_) | E::UnstableSystem(_) | E::Blowup(_) => 5,
                E::NoFeasibleStart | E::InfeasibleAtHi(_) | E::AllProbesUnstable => 6,
                E::QuadratureTooSmall(_) | E::BracketFailure(_) | E::SolverFailure(_) => 7,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
