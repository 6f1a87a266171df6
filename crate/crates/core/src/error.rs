use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("empty file: {0}")]
    EmptyFile(PathBuf),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("row {row}, column `{column}`: cannot parse `{value}` ({reason})")]
    Parse {
        row: usize,
        column: String,
        value: String,
        reason: String,
    },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("arity mismatch: model expects {expected} features, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("dataset contains a single class")]
    SingleClass,

    #[error("no positive instances: recall is undefined")]
    NoPositives,

    #[error("empty confusion matrix")]
    EmptyConfusion,

    #[error("stratified split leaves {class} with no instances in the {side} set")]
    DegenerateSplit { class: String, side: &'static str },

    #[error("minority class has {minority} rows, needs more than k = {k}")]
    MinorityTooSmall { minority: usize, k: usize },

    #[error("non-finite loss at iteration {iteration}")]
    NonFiniteLoss { iteration: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed model text at line {line}: {reason}")]
    Format { line: usize, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
            Error::EmptyFile(_) => "empty_file",
            Error::MissingColumn(_) => "missing_column",
            Error::Parse { .. } => "parse",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::Arity { .. } => "arity",
            Error::Schema(_) => "schema",
            Error::InvalidValue(_) => "invalid_value",
            Error::EmptyDataset => "empty_dataset",
            Error::SingleClass => "single_class",
            Error::NoPositives => "no_positives",
            Error::EmptyConfusion => "empty_confusion",
            Error::DegenerateSplit { .. } => "degenerate_split",
            Error::MinorityTooSmall { .. } => "minority_too_small",
            Error::NonFiniteLoss { .. } => "non_finite_loss",
            Error::Config(_) => "config",
            Error::Format { .. } => "format",
        }
    }
}
