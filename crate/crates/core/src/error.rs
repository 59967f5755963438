use thiserror::Error;

/// Errors raised by the simulator and the classical post-processing chain.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("index {index} out of range for {len} entries")]
    Index { index: usize, len: usize },

    #[error("generator matrix is rank deficient: {rows} rows but rank {rank}")]
    RankDeficient { rows: usize, rank: usize },

    #[error("inner code is not contained in the outer code")]
    NotNested,

    #[error("vector {0} is not a codeword")]
    NotCodeword(String),

    #[error("ambiguous decoding: syndrome {0} has several minimum-weight error patterns")]
    DecodeFailure(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid config at `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("bit string contains invalid character {0:?}")]
    Parse(char),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
