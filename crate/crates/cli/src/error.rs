use thiserror::Error;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] qhaar::Error),

    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write report: {0}")]
    Write(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(qhaar::Error::NonConvergence { .. })
            | CliError::Core(qhaar::Error::TruncationPolicy { .. }) => EXIT_NUMERICAL,
            CliError::Core(_) | CliError::Usage(_) | CliError::Io { .. } | CliError::Write(_) => {
                EXIT_USAGE
            }
        }
    }
}
