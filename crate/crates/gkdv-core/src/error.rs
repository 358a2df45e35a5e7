use alloc::string::String;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no soliton: {0}")]
    NoSoliton(String),
    #[error("degenerate soliton family: {0}")]
    DegenerateFamily(String),
    #[error("system not solvable: {0}")]
    NotSolvable(String),
    #[error("spectral anomaly: {0}")]
    SpectralAnomaly(String),
    #[error("source terms failed to localize: {0}")]
    CancellationFailure(String),
    #[error("index requested out of order: {0}")]
    OrderViolation(String),
    #[error("degenerate problem: {0}")]
    Degenerate(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::Error::$kind(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
