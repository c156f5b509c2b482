use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SdhtError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("enumeration budget exceeded: {count:.3e} histograms/sequences > {budget:.0e}; use Monte Carlo")]
    BudgetExceeded { count: f64, budget: f64 },

    #[error("construction impossible: {0}")]
    ConstructionImpossible(String),

    #[error("degenerate class: {0}")]
    DegenerateClass(String),

    #[error("classes not distinct: {0}")]
    ClassesNotDistinct(String),

    #[error("ordering precondition violated: {0}")]
    Ordering(String),

    #[error("excluded channel: {0}")]
    ExcludedChannel(String),

    #[error("not a separating channel: {0}")]
    NotSeparating(String),

    #[error("unsupported predicate: {0}")]
    UnsupportedPredicate(String),

    #[error("protocol not verified: {0}")]
    Unverified(String),

    #[error("bound violated: {0}")]
    BoundViolated(String),
}

pub type Result<T> = std::result::Result<T, SdhtError>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(SdhtError::Dimension { expected, got })
    }
}
