use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is singular; supply a ridge or a spanning design")]
    Singular,

    #[error("delta must lie in (0, 1/e], got {0}")]
    InvalidDelta(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("pulled arms do not span R^d and no regularizer was given")]
    DegenerateDesign,

    #[error("arms do not span R^{d} (rank {rank})")]
    RankDeficient { d: usize, rank: usize },

    #[error("budget {n} is below the rounding minimum r(eps) = {required}")]
    BudgetTooSmall { n: u64, required: u64 },

    #[error("sample budget exhausted after {used} pulls")]
    BudgetExhausted { used: u64 },

    #[error("warmup loop did not terminate within {0} iterations")]
    LoopCap(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
