use thiserror::Error;

use crate::table::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no prime p >= {min_p} with p = 1 mod {q} below the search cap 2^40")]
    SearchLimitExceeded { q: u64, min_p: u64 },

    #[error("singular matrix (rank {rank} of {size})")]
    SingularMatrix { rank: usize, size: usize },

    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{dimension} = {size} is not divisible by {blocks}")]
    Divisibility {
        dimension: &'static str,
        size: usize,
        blocks: usize,
    },

    #[error("schema error in `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("no admissible evaluation points found: {0}")]
    PointsNotFound(String),

    #[error("table failed validation")]
    InvalidTable(Box<ValidationReport>),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            field: field.into(),
            message: message.into(),
        }
    }
}
