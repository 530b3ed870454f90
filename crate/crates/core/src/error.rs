use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A model produced a NaN or infinite score.
    #[error("model output is not finite: {0}")]
    NonFiniteScore(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("parameter update is not finite")]
    NonFiniteUpdate,

    /// Training produced a non-finite loss or parameter.
    #[error("training diverged at epoch {epoch}{context}")]
    Divergence { epoch: usize, context: String },

    #[error(transparent)]
    Dataset(#[from] DatasetError),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach harness context (split, method, hyperparameters) to a divergence.
    pub fn with_context(self, ctx: impl AsRef<str>) -> Self {
        match self {
            Error::Divergence { epoch, context } => Error::Divergence {
                epoch,
                context: format!("{context} [{}]", ctx.as_ref()),
            },
            other => other,
        }
    }
}

/// Malformed or unusable dataset input.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("dataset is empty")]
    Empty,
    #[error("label column `{0}` not found")]
    MissingLabelColumn(String),
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
    #[error("non-numeric value `{value}` in column `{column}` at row {row}")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },
    #[error("label column has {0} distinct values, expected 2")]
    NotBinary(usize),
    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-finite feature at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },
    #[error("label {0} is not in {{-1, +1}}")]
    BadLabel(f64),
    #[error("dataset needs both classes present")]
    SingleClass,
    #[error("dataset has no negative examples")]
    NoNegatives,
}
