use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("fewer than 2 levels")]
    TooFewLevels,

    #[error("mismatched level counts between groups: {a} vs {b}")]
    LevelCountMismatch { a: usize, b: usize },

    #[error("non-finite value {value} in group {group}, level {level}")]
    NonFinite {
        group: String,
        level: usize,
        value: f64,
    },

    #[error("expected exactly two groups, found {found}")]
    GroupCount { found: usize },

    #[error("level {level} is out of range (levels are 1..={max})")]
    LevelOutOfRange { level: i64, max: usize },

    #[error("no comparable pairs")]
    NoComparablePairs,

    #[error("empty sub-sample")]
    EmptySubsample,

    #[error("sub-samples have unequal sizes ({lower} vs {upper})")]
    UnequalSizes { lower: usize, upper: usize },

    #[error("invalid probability {0}")]
    InvalidProbability(f64),

    #[error("sub-sample sizes must be positive (got {n1}, {n2})")]
    InvalidSize { n1: usize, n2: usize },

    #[error("enumeration cap exceeded: n1 + n2 = {total} > {cap}")]
    SizeCapExceeded { total: usize, cap: usize },

    #[error("inconsistent frequency table: {0}")]
    InconsistentTable(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
