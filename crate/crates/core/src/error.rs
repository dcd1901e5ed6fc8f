use std::path::PathBuf;

use crate::permutation::ProblemKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid permutation: value {value} at index {index} is out of range for n = {n}")]
    OutOfRange { index: usize, value: usize, n: usize },
    #[error("invalid permutation: value {value} at index {index} is a duplicate")]
    Duplicate { index: usize, value: usize },
    #[error("empty permutation")]
    Empty,
    #[error("{kind} needs n >= {min}, got n = {n}")]
    TooSmall { kind: ProblemKind, min: usize, n: usize },
    #[error("dimension mismatch: expected n = {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("problem kind mismatch: expected {expected}, got {found}")]
    KindMismatch {
        expected: ProblemKind,
        found: ProblemKind,
    },
    #[error("population size {mu} is too small (need at least {min})")]
    PopulationTooSmall { mu: usize, min: usize },
    #[error("diversity vectors have different nominal lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("invalid move: {0}")]
    InvalidMove(String),
    #[error("invalid derangement: {0}")]
    InvalidDerangement(String),
    #[error("operator {op} is not applicable: {reason}")]
    Operator { op: String, reason: String },
    #[error("out of range: {0}")]
    Range(String),
    #[error("search space too large: {size} exceeds cap {cap}")]
    CapExceeded { size: u128, cap: u128 },
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("optimum unknown for this instance")]
    OptimumUnknown,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error at token {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("{path}:{line}: {message}")]
    PopulationFile {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("solution does not match the instance: {0}")]
    SolutionMismatch(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
