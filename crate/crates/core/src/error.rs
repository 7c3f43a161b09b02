use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by sanlab operations.
#[derive(Debug, Error)]
pub enum SanError {
    #[error("tensor rank must be 1 or 2, got {0}")]
    BadRank(usize),
    #[error("tensor extents must all be >= 1, got {0:?}")]
    ZeroExtent(Vec<usize>),
    #[error("extents {extents:?} hold {expected} values but {actual} were supplied")]
    LengthMismatch {
        extents: Vec<usize>,
        expected: usize,
        actual: usize,
    },
    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },
    #[error("kernel extents {kernel:?} exceed input extents {input:?}")]
    KernelTooLarge {
        kernel: Vec<usize>,
        input: Vec<usize>,
    },
    #[error("invalid sparsity parameter: {0}")]
    InvalidSparsity(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("empty dataset: {0}")]
    EmptyDataset(String),
    #[error("index {index} out of range for {len} entries")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("malformed data: {0}")]
    Format(String),
    #[error("segment of {len} samples too short: need at least {needed}")]
    TooShort { len: usize, needed: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = SanError> = std::result::Result<T, E>;
