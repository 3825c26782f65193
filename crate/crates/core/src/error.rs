use thiserror::Error;

/// Failure modes shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An input left the numeric domain a function is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// A space could not be constructed or fails its metric axioms.
    #[error("invalid space: {0}")]
    InvalidSpace(String),

    /// A configuration violates its space or point-count requirements.
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    /// An argument (options, schedules, exponents) fails validation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Signatures of different lengths cannot be compared.
    #[error("signature length mismatch: {left} vs {right}")]
    SignatureMismatch { left: usize, right: usize },

    /// Exhaustive enumeration would exceed the configured budget.
    #[error(
        "enumeration budget exceeded: C({m},{n}) = {combinations} subsets > budget {budget}"
    )]
    BudgetExceeded {
        m: usize,
        n: usize,
        combinations: u128,
        budget: u128,
    },

    /// The solver could not produce any usable iterate.
    #[error("solver failure: {0}")]
    SolverFailure(String),

    /// No known optimality criterion applies to the requested parameters.
    #[error("hypothesis not covered; optimality unknown: {0}")]
    HypothesisNotCovered(String),

    /// A text input (CSV matrix, config file, schedule) failed to parse.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
