use std::path::PathBuf;

use thiserror::Error;

use qcpd_core::pipeline::PipelineError;
use qcpd_core::ExperimentError;

/// Exit codes: 2 usage, 3 I/O, 4 unparsable input.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Parse { .. } => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// Errors raised while writing `path`.
    pub fn writing(path: impl Into<PathBuf>, err: ExperimentError) -> Self {
        let path = path.into();
        match err {
            ExperimentError::Io(source) => CliError::Io { path, source },
            other => CliError::Io { path, source: std::io::Error::other(other.to_string()) },
        }
    }

    /// Errors raised while reading the event file `path`.
    pub fn reading(path: impl Into<PathBuf>, err: PipelineError) -> Self {
        let path = path.into();
        match err {
            PipelineError::Io(source) => CliError::Io { path, source },
            PipelineError::Csv(e) if e.is_io_error() => match e.into_kind() {
                csv::ErrorKind::Io(source) => CliError::Io { path, source },
                _ => unreachable!("checked is_io_error"),
            },
            other => CliError::Parse { path, message: other.to_string() },
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(err: ExperimentError) -> Self {
        match err {
            ExperimentError::Io(source) => CliError::Io { path: PathBuf::new(), source },
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(err: PipelineError) -> Self {
        match err {
            PipelineError::Io(source) => CliError::Io { path: PathBuf::new(), source },
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<qcpd_core::StrategyError> for CliError {
    fn from(err: qcpd_core::StrategyError) -> Self {
        CliError::Usage(err.to_string())
    }
}
