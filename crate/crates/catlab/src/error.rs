use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

/// Exit status: everything passed.
pub const EXIT_OK: u8 = 0;
/// Exit status: a hard invariant failed.
pub const EXIT_INVARIANT: u8 = 1;
/// Exit status: bad flags, config or parameters.
pub const EXIT_USAGE: u8 = 2;
/// Exit status: the Fock truncation cannot hold the requested state.
pub const EXIT_TRUNCATION: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] catlab_core::Error),
    #[error("config file {path}: {source}")]
    ConfigFile {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invariant failures: {}", .0.join("; "))]
    Invariant(Vec<String>),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(catlab_core::Error::Truncation { .. }) => EXIT_TRUNCATION,
            CliError::Invariant(_) => EXIT_INVARIANT,
            _ => EXIT_USAGE,
        }
    }
}

impl From<&CliError> for ExitCode {
    fn from(e: &CliError) -> Self {
        ExitCode::from(e.exit_code())
    }
}
