use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: non-finite value {value} at row {row}, column {col}")]
    NonFinite { row: usize, col: usize, value: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("infeasible budget: {0}")]
    InfeasibleBudget(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("threshold input is the zero vector")]
    ZeroVector,

    #[error("threshold input has no strictly positive entry")]
    NoPositiveEntry,

    #[error("soft threshold {lambda} removes every entry (max |w_i| = {max_abs})")]
    VanishedThreshold { lambda: f64, max_abs: f64 },

    #[error("loading matrix is rank deficient; projection is singular")]
    SingularProjection,

    #[error("oracle enumeration guard: dimension {d} exceeds limit {limit}")]
    OracleTooLarge { d: usize, limit: usize },

    #[error("oracle bracket failure: {0}")]
    BracketFailure(String),

    #[error("matrix is not positive semidefinite (eigenvalue {0})")]
    NotPsd(f64),

    #[error("{path}: line {line}, column {col}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        col: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
