use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("interface spacing must be an even integer >= 2, got {0}")]
    InvalidSpacing(i64),

    #[error("{what}: argument {value} is outside the domain ({detail})")]
    Domain {
        what: &'static str,
        value: f64,
        detail: String,
    },

    #[error("horizon would exceed {cap} steps before the tail bound reaches {tolerance:e}")]
    HorizonOverflow { cap: usize, tolerance: f64 },

    #[error("polymer length must be even here, got {0}")]
    OddLength(u64),

    #[error("{what} is limited to {limit}, got {got}")]
    TooLarge {
        what: &'static str,
        limit: u64,
        got: u64,
    },

    #[error("empty input passed to {0}")]
    EmptyInput(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("contact skeleton invariant violated: {0}")]
    InvalidSkeleton(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
