use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("basis is singular")]
    SingularBasis,
    #[error("invalid body: {0}")]
    InvalidBody(String),
    #[error("assumption violated: {k}·alpha lies in the lattice (need k·alpha ∉ Λ for 1 ≤ k ≤ Q)")]
    AssumptionViolated { k: u64 },
    #[error("enumeration would exceed the node cap ({cap}); estimated {estimate:.3e} nodes")]
    CapExceeded { estimate: f64, cap: u64 },
    #[error("coefficient box radius {given} is too small; at least {required} is needed")]
    BoxTooSmall { given: i64, required: i64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("not a packing: {0}")]
    NotAPacking(String),
    #[error("random instance generation gave up after {attempts} attempts")]
    ResampleExhausted { attempts: u32 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
