use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] gkdv_core::Error),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numerical divergence at t = {t}: {reason}")]
    Divergence { t: f64, reason: String, last_good: Option<Box<crate::evolver::EvolutionState>> },
    #[error("not found: {0}")]
    NotFound(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

macro_rules! invalid {
    ($($arg:tt)*) => {
        return Err($crate::LabError::InvalidArgument(format!($($arg)*)))
    };
}
pub(crate) use invalid;
