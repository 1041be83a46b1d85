use thiserror::Error;

/// Errors surfaced by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("grid has {count} points, stencil needs at least {needed}")]
    GridTooSmall { count: usize, needed: usize },
    #[error("degenerate F = 1 + u: min(1 + u) = {min} is not above {guard}")]
    Degenerate { min: f64, guard: f64 },
    #[error("singular factorization at pivot {pivot}")]
    Singular { pivot: usize },
    #[error("insufficient snapshots: need {needed}, have {have}")]
    InsufficientSnapshots { needed: usize, have: usize },
    #[error("expansion fit failed: {0}")]
    FitFailed(String),
    #[error("picard iteration diverged after {iterations} iterations")]
    Diverged { iterations: usize, history: Vec<f64> },
    #[error("initial data too large: initial norm {norm} exceeds threshold {threshold}")]
    NotSmall { norm: f64, threshold: f64 },
    #[error("profile is not strictly monotone at sample {index}")]
    NonMonotone { index: usize },
    #[error("grid point s = {s} lies outside the profile support [{lo}, {hi}]")]
    OutOfSupport { s: f64, lo: f64, hi: f64 },
    #[error("truncation order {requested} exceeds the available order {available}")]
    TruncationOrder { requested: u32, available: u32 },
    #[error("non-finite value produced in {0}")]
    NonFinite(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
