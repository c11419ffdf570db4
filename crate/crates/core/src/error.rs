use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("length {len} is not a power of two")]
    NotPowerOfTwo { len: usize },

    #[error("{what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("empty vector")]
    Empty,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("zero vector passed to {0}")]
    ZeroVector(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),

    #[error("dense oracle too large: K*N = {size} exceeds {limit}")]
    SizeGuard { size: usize, limit: usize },

    #[error("neighborhood sampler rejected {attempts} consecutive draws")]
    Sampling { attempts: usize },

    #[error("negative radicand {value:e} in relative error evaluation")]
    NegativeRadicand { value: f64 },
}
