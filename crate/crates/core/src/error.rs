use alloc::string::String;

/// Rejections raised by the core operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("inadmissible material: {0} fails")]
    InadmissibleMaterial(&'static str),
    #[error("tensor is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("wave vector must be nonzero")]
    ZeroWaveVector,
    #[error("constants undefined when eigenvalues coincide (k1 = k3)")]
    CoincidentEigenvalues,
    #[error("degenerate denominator: {0}")]
    Degenerate(&'static str),
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("rank-deficient design matrix (condition number {0:e})")]
    RankDeficient(f64),
    #[error("root finding failed: {0}")]
    NoRoot(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = core::result::Result<T, Error>;
