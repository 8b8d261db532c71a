use std::path::PathBuf;

use crate::types::FuelType;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("no carbon intensity for fuel {0}")]
    MissingIntensity(FuelType),

    #[error("carbon intensity for {fuel} must be finite and non-negative, got {value}")]
    InvalidIntensity { fuel: FuelType, value: f64 },

    #[error("invalid value in {context}: {value}")]
    InvalidValue { context: String, value: f64 },

    #[error("invalid fuel: {0}")]
    InvalidFuel(String),

    #[error("length mismatch for {what}: expected {expected} hours, found {found}")]
    LengthMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("incomplete hour starting {timestamp}: {count} of 4 quarter-hour records")]
    IncompleteHour { timestamp: String, count: usize },

    #[error("timestamps out of order for {fuel} at {timestamp}")]
    UnorderedTimestamps { fuel: String, timestamp: String },

    #[error("no profile for project {0}")]
    MissingProfile(String),

    #[error("invalid project {id}: {reason}")]
    InvalidProject { id: String, reason: String },

    #[error("invalid storage spec: {0}")]
    InvalidSpec(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("total generation is zero")]
    ZeroGeneration,

    #[error("nothing to compare")]
    EmptyComparison,

    #[error("not a completed run directory: {}", .0.display())]
    MissingRunDir(PathBuf),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}{}: {message}", .path.display(), line.map(|l| format!(":{l}")).unwrap_or_default())]
    Parse {
        path: PathBuf,
        line: Option<u64>,
        message: String,
    },

    #[error("{}{}: {source}", .path.display(), line.map(|l| format!(":{l}")).unwrap_or_default())]
    InFile {
        path: PathBuf,
        line: Option<u64>,
        #[source]
        source: Box<Error>,
    },

    #[error("scenario '{name}': {source}")]
    Scenario {
        name: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_file(self, path: impl Into<PathBuf>, line: Option<u64>) -> Self {
        Error::InFile {
            path: path.into(),
            line,
            source: Box::new(self),
        }
    }

    /// True for problems with the configuration or the storage spec rather
    /// than with the data files they point at.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Config(_) | Error::InvalidSpec(_) => true,
            Error::Scenario { source, .. } | Error::InFile { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}
