use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("unknown word: {0:?}")]
    UnknownWord(String),

    #[error("unknown role: {0:?}")]
    UnknownRole(String),

    #[error("id out of range: {kind} {id} (size {size})")]
    IdOutOfRange { kind: &'static str, id: usize, size: usize },

    #[error("geometry mismatch: operation requires a {expected} model")]
    GeometryMismatch { expected: &'static str },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("too few scored pairs ({scored} of {total}, {skipped} skipped as out-of-vocabulary)")]
    TooFewPairs { scored: usize, skipped: usize, total: usize },

    #[error("non-finite loss in epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("corrupt model file at byte offset {offset}: {msg}")]
    Corrupt { offset: u64, msg: String },

    #[error("unsupported model format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("config: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }

    /// Process exit code: 1 usage, 2 data, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Dimension { .. }
            | Error::IdOutOfRange { .. }
            | Error::GeometryMismatch { .. }
            | Error::Invalid(_)
            | Error::Config(_) => 1,
            Error::NonFiniteLoss { .. } | Error::UndefinedCorrelation(_) => 3,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
