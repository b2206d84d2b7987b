use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("coincident sites: zero separation")]
    ZeroSeparation,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {deviation:.3e}, scale {scale:.3e})")]
    NotHermitian { deviation: f64, scale: f64 },

    #[error("eigensolver did not converge for a {0}x{0} matrix")]
    EigenFailure(usize),

    #[error("duplicate site index {0} in cluster")]
    DuplicateSite(usize),

    #[error("site index {index} out of range for bath of {len} spins")]
    SiteOutOfRange { index: usize, len: usize },

    #[error("no spinful sites in the bath")]
    EmptyBath,

    #[error("cluster set integrity: {0}")]
    MissingSubcluster(String),

    #[error("Hilbert space dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("time grid: {0}")]
    TimeGrid(String),

    #[error("degenerate series: C(0) equals its time average")]
    DegenerateSeries,

    #[error("scale range: {0}")]
    ScaleRange(String),

    #[error("empty band [{lo}, {hi}]: no grid rows inside")]
    EmptyBand { lo: f64, hi: f64 },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
