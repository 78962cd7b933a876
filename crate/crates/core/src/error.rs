use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Arguments outside the domain of an operation (e.g. `p = 0`, a coordinate past `p`).
    #[error("domain error: {0}")]
    Domain(String),

    /// The instance is larger than the configured guardrail. `required` is exact.
    #[error("{what} budget exceeded: {required} required, budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        required: String,
        budget: u64,
    },

    /// The closed-form layer heights only hold for `r <= min(p, q)`.
    #[error("closed-form heights unavailable: {0}; use longest-path heights from the poset or quotient DAG")]
    ClosedFormUnavailable(String),

    /// A custom order contains a cycle.
    #[error("malformed order: {0}")]
    MalformedOrder(String),

    /// A document or argument could not be parsed.
    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Two computations that must agree did not. Never expected in practice.
    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    /// A chain profile takes a step that is not a move up the order.
    #[error("invalid chain profile: {0}")]
    Profile(String),

    #[error("quotient DAG is not graded: {0}")]
    NotGraded(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
