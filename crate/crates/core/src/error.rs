use std::path::PathBuf;

use thiserror::Error;

/// Failures raised by fitting, estimation and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("design matrix is rank deficient (pivot {pivot:e} at column {column})")]
    RankDeficient { column: usize, pivot: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("too few points: need at least {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("standard error undefined: {0}")]
    UndefinedSe(String),

    #[error("standard error is zero; test statistic is not finite")]
    ZeroSe,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("no prediction available for row {0}")]
    UnknownRow(usize),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    /// Short machine-readable tag, used in the `status` column of replicate records.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::RankDeficient { .. } => "rank_deficient",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::DegenerateInput(_) => "degenerate_input",
            Error::TooFewPoints { .. } => "too_few_points",
            Error::UndefinedSe(_) => "undefined_se",
            Error::ZeroSe => "zero_se",
            Error::InvalidConfig(_) => "invalid_config",
            Error::NonFinite(_) => "non_finite",
            Error::UnknownRow(_) => "unknown_row",
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
