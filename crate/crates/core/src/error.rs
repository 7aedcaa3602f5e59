use alloc::string::String;

/// Errors raised by the estimation and simulation routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("issue `{0}` has zero return variance")]
    ZeroVariance(String),

    #[error("series do not share a calendar: {0}")]
    CalendarMismatch(String),

    #[error("intraday profile has no bucket for minute-of-day {0}")]
    MissingBucket(u16),

    #[error(
        "circulant embedding has eigenvalue {min_eigenvalue:e} below tolerance and n={n} exceeds the dense fallback limit"
    )]
    EmbeddingFailed { min_eigenvalue: f64, n: usize },

    #[error("covariance matrix is not positive semi-definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { pivot: f64, row: usize },

    #[error("position {0} is outside the series")]
    OutOfRange(usize),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::error::Error::InvalidParameter(alloc::format!($($arg)*))
    };
}

macro_rules! insufficient {
    ($($arg:tt)*) => {
        $crate::error::Error::InsufficientData(alloc::format!($($arg)*))
    };
}

pub(crate) use insufficient;
pub(crate) use invalid;
