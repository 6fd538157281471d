use std::fmt;
use std::path::{Path, PathBuf};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Model(fibersr::Error),
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self::Usage(msg.into())
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use fibersr::Error as E;
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Io { .. } => EXIT_IO,
            Self::Model(e) => match e {
                E::ToleranceFailure { .. }
                | E::TraceDrift { .. }
                | E::PositivityViolation { .. }
                | E::AtomCountExceedsCap { .. }
                | E::NonPermutationInvariantCoupling
                | E::ConventionMismatch { .. }
                | E::DimensionMismatch { .. } => EXIT_SOLVER,
                _ => EXIT_USAGE,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(msg) => write!(f, "{msg}"),
            Self::Model(e) => write!(f, "{e}"),
            Self::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl From<fibersr::Error> for CliError {
    fn from(e: fibersr::Error) -> Self {
        Self::Model(e)
    }
}
