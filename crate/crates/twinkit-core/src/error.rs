use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, TwinError>;

/// Errors produced by dataset handling, the nearest-neighbor index, and the
/// splitting algorithms.
#[derive(Debug, Error)]
pub enum TwinError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV in {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("cell at row {row}, column {column:?} is not a finite number: {value:?}")]
    NonNumericCell {
        row: usize,
        column: String,
        value: String,
    },
    #[error("duplicate column name {name:?}")]
    DuplicateColumn { name: String },
    #[error("unknown column {name:?}")]
    UnknownColumn { name: String },
    #[error("column selection is empty")]
    EmptySelection,
    #[error("dataset must have at least 2 rows, found {found}")]
    TooFewRows { found: usize },
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("column {name:?} has zero variance")]
    ConstantColumn { name: String },
    #[error("value at row {row}, column {col} is not finite")]
    NonFiniteValue { row: usize, col: usize },
    #[error("row lengths differ: row {row} has {found} values, expected {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("row index {index} out of range for {len} rows")]
    RowOutOfRange { index: usize, len: usize },
    #[error("duplicate row index {index}")]
    DuplicateIndex { index: usize },
    #[error("index set must be non-empty")]
    EmptySubset,
    #[error("index set must be a proper subset of the dataset")]
    SubsetIsWholeDataset,
    #[error("index sets overlap at row {index}")]
    OverlappingParts { index: usize },
    #[error("all points are masked")]
    AllMasked,
    #[error("row {index} is already masked")]
    AlreadyMasked { index: usize },
    #[error("need {requested} unmasked points, only {available} remain")]
    NotEnoughUnmasked { requested: usize, available: usize },
    #[error("splitting ratio r must be at least 2, got {r}")]
    RatioTooSmall { r: usize },
    #[error("splitting ratio r = {r} exceeds the number of rows ({rows})")]
    RatioTooLarge { r: usize, rows: usize },
    #[error("fold count k = {k} must be between 2 and the number of rows ({rows})")]
    FoldCountOutOfRange { k: usize, rows: usize },
    #[error("k must be a power of 2 for the halving strategy, got {k}")]
    NotPowerOfTwo { k: usize },
    #[error("fold sets do not partition the dataset rows")]
    NotAPartition,
    #[error("{combinations} candidate subsets exceed the enumeration guard of {guard}")]
    EnumerationGuard { combinations: u128, guard: u128 },
    #[error("query has {found} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
}

impl TwinError {
    /// True when the underlying failure is file I/O rather than content.
    pub fn is_io(&self) -> bool {
        match self {
            TwinError::Io { .. } => true,
            TwinError::Csv { source, .. } => matches!(source.kind(), csv::ErrorKind::Io(_)),
            _ => false,
        }
    }
}
