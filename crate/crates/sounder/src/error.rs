//! CLI-facing error type with stable exit codes.

use std::fmt;
use std::path::PathBuf;

use sounder_core::Error as CoreError;

/// Exit codes: 0 success, 1 io, 2 usage/config, 3 empty result,
/// 4 numerical failure.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad config files, malformed input files.
    Usage(String),
    /// Pipeline produced nothing to report.
    Empty(String),
    /// A numerical routine failed or the data was degenerate.
    Numerical(String),
    Io { path: PathBuf, source: std::io::Error },
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Usage(_) => 2,
            CliError::Empty(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Empty(msg) => write!(f, "{msg}"),
            CliError::Numerical(msg) => write!(f, "{msg}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::EmptyDataset => CliError::Empty(e.to_string()),
            CoreError::NumericalFailure { .. }
            | CoreError::DegenerateInput(_)
            | CoreError::Domain(_)
            | CoreError::SingularSystem => CliError::Numerical(e.to_string()),
            CoreError::InvalidArgument(_) | CoreError::InsufficientData { .. } => {
                CliError::Usage(e.to_string())
            }
        }
    }
}
