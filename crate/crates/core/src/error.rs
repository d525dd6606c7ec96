use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed csv: {0}")]
    Csv(String),
    #[error("row {row} has {found} cells, expected {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("dataset has no data rows")]
    EmptyDataset,
    #[error("missing value in row {row}, column {column:?}")]
    MissingCell { row: usize, column: String },
    #[error("invalid number {value:?} in continuous column {column:?}")]
    InvalidNumber { column: String, value: String },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("unknown category {label:?} in column {column:?}")]
    UnknownCategory { column: String, label: String },

    #[error("non-finite {which} loss at step {step}")]
    NonFiniteLoss { which: &'static str, step: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("cluster count {clusters} exceeds point count {points}")]
    CLargerThanN { clusters: usize, points: usize },
    #[error("median pairwise distance is zero, cannot pick an RBF bandwidth")]
    DegenerateGamma,

    #[error("complex exceeds the simplex budget of {budget}")]
    ComplexTooLarge { budget: usize },
    #[error("diagrams carry {left} and {right} infinite bars")]
    InfiniteBarMismatch { left: usize, right: usize },
    #[error("subsample size {size} is invalid for a cloud of {points} points")]
    SubsampleTooLarge { size: usize, points: usize },

    #[error("empty sample")]
    EmptySample,
    #[error("fewer than two bins remain after merging")]
    DegenerateBinning,

    #[error("serialization failed: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
