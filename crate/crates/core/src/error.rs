use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} must be at least 1")]
    ZeroSize { what: &'static str },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("depth {depth} out of range (model depth {max})")]
    DepthOutOfRange { depth: usize, max: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite fitness value {0}")]
    NonFiniteFitness(f64),

    #[error("not a permutation of 0..{0}")]
    NotPermutation(usize),

    #[error("problem size {size} too large for exhaustive enumeration (limit {limit})")]
    TooLarge { size: usize, limit: usize },

    #[error("TSPLIB: unsupported {keyword}: {value}")]
    Unsupported { keyword: String, value: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("snapshot: {0}")]
    Snapshot(String),
}
