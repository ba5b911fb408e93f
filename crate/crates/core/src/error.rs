use thiserror::Error;

/// Errors produced by estimation, testing and simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series too short: need at least {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("non-finite observation at position {0}")]
    NonFinite(usize),

    #[error("recursion diverged at step {step} (state {state})")]
    Divergence { step: usize, state: f64 },

    #[error("residual pool is empty")]
    EmptyPool,

    #[error("skewness parameter must be positive and finite, got {0}")]
    InvalidSkewness(f64),

    #[error("degenerate truncation: {kept} observation(s) inside [-{a_n}, {a_n}], need at least {needed}")]
    DegenerateTruncation { kept: usize, needed: usize, a_n: f64 },

    #[error("values have zero spread; bandwidth is undefined")]
    ZeroSpread,

    #[error("degenerate statistic input: {0}")]
    DegenerateInput(String),

    #[error("quadrature oracle supports at most 2 lags, got k = {0}")]
    UnsupportedDimension(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{failed} of {total} bootstrap replicates failed (limit {limit})")]
    BootstrapFailure {
        failed: usize,
        total: usize,
        limit: usize,
    },

    #[error("{model}/{hypothesis} n={n} replicate {replicate}: {source}")]
    Cell {
        model: String,
        hypothesis: String,
        n: usize,
        replicate: usize,
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
