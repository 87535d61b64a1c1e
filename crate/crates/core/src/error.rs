use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("spectrum violates Hermitian symmetry (relative defect {0:.3e})")]
    NotHermitian(f64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("degenerate ratio: {0}")]
    Degenerate(String),
    #[error("Littlewood-Paley block {0} is empty")]
    EmptyBlock(usize),
    #[error("non-finite values: {0}")]
    NonFinite(String),
    #[error("insufficient data: {0}")]
    Insufficient(String),
    #[error("malformed field container: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
