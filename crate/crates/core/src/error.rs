use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value in cell {cell} ({context})")]
    NonFinite { context: &'static str, cell: usize },

    #[error("incompatible grids: {0}")]
    IncompatibleGrids(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{numflux} flux is not defined for the {flux} equation")]
    UnsupportedFlux {
        numflux: &'static str,
        flux: &'static str,
    },

    #[error("sample {sample} (seed {seed:#018x}): {source}")]
    Sample {
        sample: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("config line {line}: key `{key}`: {message}")]
    Config {
        line: usize,
        key: String,
        message: String,
    },

    #[error("self-check failed: {0}")]
    Check(String),

    #[error("invalid config: {0}")]
    Validation(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("manifest serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input rather than a failed run.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Config { .. }
            | Error::Validation(_)
            | Error::InvalidGrid(_)
            | Error::InvalidArgument(_)
            | Error::UnsupportedFlux { .. }
            | Error::IncompatibleGrids(_) => true,
            Error::Sample { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}
