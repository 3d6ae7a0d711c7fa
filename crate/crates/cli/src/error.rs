use std::process::ExitCode;

use expertfind_service::ServiceError;

/// Failure of a subcommand, classified by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Self::Usage(_) => 1,
            Self::Data(_) => 2,
            Self::Runtime(_) => 3,
        })
    }
}

impl From<expertfind_core::Error> for CliError {
    fn from(err: expertfind_core::Error) -> Self {
        use expertfind_core::Error as E;
        let message = err.to_string();
        match err {
            E::RegimeUnavailable(_) | E::EmbeddingsRequired => Self::Usage(message),
            E::SolverNonConvergence { .. } | E::NonFiniteCost | E::InvalidTransport(_) => {
                Self::Runtime(message)
            }
            _ => Self::Data(message),
        }
    }
}

impl From<ServiceError> for CliError {
    fn from(err: ServiceError) -> Self {
        let message = err.to_string();
        match err {
            ServiceError::Config(_) | ServiceError::MissingFile(_) | ServiceError::Load(_) => {
                Self::Data(message)
            }
            ServiceError::Bind { .. } | ServiceError::Serve(_) => Self::Runtime(message),
        }
    }
}
