use thiserror::Error;

/// CLI failure, mapped onto a stable process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unknown methods, arguments inconsistent with the input.
    #[error("{0}")]
    Usage(String),
    /// Unreadable or malformed input files, or output that cannot be written.
    #[error("{0}")]
    Data(String),
    /// A campaign finished but some runs errored.
    #[error("{failed} of {total} runs failed")]
    Partial { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Partial { .. } => 4,
        }
    }
}

impl From<osil::Error> for CliError {
    fn from(e: osil::Error) -> Self {
        use osil::Error as E;
        match e {
            E::CoordinatesRequired(_)
            | E::TrivialClustering { .. }
            | E::InvalidParameters(_)
            | E::UnsupportedModel(_) => CliError::Usage(e.to_string()),
            E::Input(_) | E::NonFinite { .. } | E::LengthMismatch { .. } | E::Io { .. } => {
                CliError::Data(e.to_string())
            }
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn io_error(path: &std::path::Path, e: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}
