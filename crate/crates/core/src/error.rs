use std::path::PathBuf;

use crate::tracking::Role;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("missing required column `{column}` in {path}")]
    MissingColumn { column: String, path: PathBuf },

    #[error("invalid value in {path} line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("no_support: {0}")]
    NoSupport(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("missing role {0} for play")]
    MissingRole(Role),

    #[error("catch at x_adj={0} is inside the target endzone")]
    CatchInEndzone(f64),

    #[error("invalid utility table: {0}")]
    UtilityTable(String),

    #[error("invalid model file: {0}")]
    ModelFormat(String),

    #[error("missing artifact {path}; run `{producer}` first")]
    MissingArtifact { path: PathBuf, producer: String },

    #[error("unknown play {game_id}/{play_id}")]
    UnknownPlay { game_id: u64, play_id: u64 },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Csv { .. } => "csv",
            Error::MissingColumn { .. } => "missing_column",
            Error::Parse { .. } => "parse",
            Error::NoSupport(_) => "no_support",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InsufficientData(_) => "insufficient_data",
            Error::InvalidConfig(_) => "invalid_config",
            Error::MissingRole(_) => "missing_role",
            Error::CatchInEndzone(_) => "catch_in_endzone",
            Error::UtilityTable(_) => "utility_table",
            Error::ModelFormat(_) => "model_format",
            Error::MissingArtifact { .. } => "missing_artifact",
            Error::UnknownPlay { .. } => "unknown_play",
            Error::Json(_) => "json",
        }
    }
}
