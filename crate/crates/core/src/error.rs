use thiserror::Error;

/// Errors produced by the decomposition calculus, the numerical kernels and
/// the sampler.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("support mismatch: {0}")]
    SupportMismatch(String),

    #[error("mass function must be strictly positive; zero or negative value at index {index}")]
    Positivity { index: usize },

    #[error("invalid mass function: {0}")]
    InvalidMassFunction(String),

    #[error("likelihood ratio order violated at index {index} (relative increase {magnitude:e})")]
    OrderViolation { index: usize, magnitude: f64 },

    #[error("mixing distribution has mass outside the admissible support: {0}")]
    MixingSupport(String),

    #[error("count truncation too short: tail mass bound {tail:e} exceeds {limit:e}")]
    InsufficientTruncation { tail: f64, limit: f64 },

    #[error("numerical routine did not converge (best estimate {best:e}, achieved tolerance {achieved_tol:e})")]
    NonConvergence { best: f64, achieved_tol: f64 },

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("invalid sampler state: {0}")]
    State(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("chain failed at iteration {iteration}: {message}")]
    Chain { iteration: usize, message: String },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("no retained draws to summarize")]
    EmptyChain,

    #[error("grid point {point} is outside the usable range or has zero density; choose a tighter grid")]
    GridRange { point: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
