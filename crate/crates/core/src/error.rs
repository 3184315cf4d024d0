use std::path::PathBuf;

use thiserror::Error;

use crate::domain::ModelKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("points per game undefined for {player_id}: games_played is 0")]
    UndefinedLabel { player_id: String },

    #[error("invalid record: {0}")]
    InvalidRecord(String),

    #[error("invalid hyperparameters for {kind}: {reason}")]
    InvalidHyperparams { kind: ModelKind, reason: String },

    #[error("{path}: missing required column `{column}`")]
    Schema { path: PathBuf, column: String },

    #[error("{path}: row {row}: cannot parse `{column}` value {value:?}")]
    Parse {
        path: PathBuf,
        row: usize,
        column: String,
        value: String,
    },

    #[error("{path}: row {row}: {reason}")]
    Validation {
        path: PathBuf,
        row: usize,
        reason: String,
    },

    #[error("{path}: duplicate key {key}")]
    DuplicateKey { path: PathBuf, key: String },

    #[error("need at least {needed} rows, got {got}")]
    TooFewRows { needed: usize, got: usize },

    #[error("shape mismatch: expected width {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("training diverged after {epochs} epochs (loss is not finite)")]
    TrainingDiverged { epochs: usize },

    #[error("model kind {0} was not searched")]
    MissingKind(ModelKind),

    #[error("no prediction for player {0}")]
    MissingPrediction(String),

    #[error("no team form for players: {}", .0.join(", "))]
    UnknownTeam(Vec<String>),

    #[error("unsupported archive schema_version {0} (expected 1)")]
    UnsupportedVersion(u64),

    #[error("unknown model kind `{0}`")]
    UnknownKind(String),

    #[error("archive payload does not match model kind {0}")]
    PayloadMismatch(ModelKind),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed archive: {source}")]
    Archive {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        // csv wraps I/O failures; surface those as plain I/O errors so callers
        // can tell a missing file from a malformed one.
        let path = path.into();
        if source.is_io_error() {
            if let csv::ErrorKind::Io(e) = source.into_kind() {
                return Error::Io { path, source: e };
            }
            unreachable!("is_io_error implies ErrorKind::Io");
        }
        Error::Csv { path, source }
    }

    /// True when the error stems from bad user input rather than a fault in
    /// the pipeline itself.
    pub fn is_user_error(&self) -> bool {
        !matches!(
            self,
            Error::TrainingDiverged { .. } | Error::NonFinite(_) | Error::MissingKind(_)
        )
    }
}
