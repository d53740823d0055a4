use thiserror::Error;

/// Everything that can go wrong inside the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("deterministic strategy count {count} exceeds the cap {cap}")]
    StrategyCapExceeded { count: u128, cap: u64 },
    #[error("matrix dimension {dim} exceeds the cap {cap}")]
    DimensionCapExceeded { dim: u128, cap: usize },
    #[error("invalid behavior: {0}")]
    InvalidBehavior(String),
    #[error("invalid functional: {0}")]
    InvalidFunctional(String),
    #[error("degenerate functional: the LHV constants are both zero")]
    DegenerateFunctional,
    #[error("scenario mismatch between arguments")]
    ScenarioMismatch,
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
    #[error("dilation check failed: max residual {0:e}")]
    DilationFailed(f64),
    #[error("operator is not tensor positive (product expectation {0:e})")]
    NotTensorPositive(f64),
    #[error("behavior is not in the span of deterministic behaviors (signaling?)")]
    Infeasible,
    #[error("linear program did not converge: {0}")]
    Nonconvergence(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
