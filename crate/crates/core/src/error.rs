use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty range")]
    EmptyRange,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid support: {0}")]
    InvalidSupport(String),
    #[error("invalid symbol {symbol:?} in block {block:?}")]
    InvalidSymbol { symbol: char, block: String },
    #[error("enumeration cap: length {len} exceeds cap {cap}")]
    EnumerationCap { len: usize, cap: usize },
    #[error("IE cap exceeded: {zeros} zero positions, at most {cap} allowed")]
    InclusionExclusionCap { zeros: usize, cap: usize },
    #[error("position {position} out of range for length {len}")]
    PositionOutOfRange { position: u64, len: usize },
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix entry {value} at ({row}, {col}) is not allowed here")]
    InvalidEntry { row: usize, col: usize, value: f64 },
    #[error("range overflow: need values up to {needed}, table ends at {available}")]
    RangeOverflow { needed: u64, available: u64 },
    #[error("invalid correlation spec: {0}")]
    InvalidCorrelation(String),
    #[error("operation needs a {expected} table, got {found}")]
    WrongFunction { expected: &'static str, found: &'static str },
    #[error("sign pattern has {found} entries, base support has {expected}")]
    SignCount { expected: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed table file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
