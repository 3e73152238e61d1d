use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The input does not have the shape an instance or matrix needs.
    #[error("malformed input: {0}")]
    Structural(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A caller broke an operation's documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// An arc set that must be acyclic contains this cycle.
    #[error("arc set is not acyclic; cycle {0:?}")]
    Cyclic(Vec<usize>),

    #[error("instance too large for the exact oracle (n = {n}, cap = {cap})")]
    TooLarge { n: usize, cap: usize },

    #[error("latency of node {0} is zero; bucketing needs positive latencies")]
    DegenerateLatency(usize),

    #[error("LP solve failed: {0}")]
    Lp(String),

    /// An internal invariant or bound failed. `trace` holds the solver state
    /// at the point of failure when one is available.
    #[error("assertion `{check}` failed: {detail}")]
    Assertion {
        check: String,
        detail: String,
        trace: Option<Box<serde_json::Value>>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn assertion(check: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Assertion {
            check: check.into(),
            detail: detail.into(),
            trace: None,
        }
    }

    /// Attaches a serialized trace to an assertion error. Other variants are
    /// returned unchanged.
    pub fn with_trace<T: serde::Serialize>(self, trace: &T) -> Self {
        match self {
            Error::Assertion { check, detail, .. } => Error::Assertion {
                check,
                detail,
                trace: serde_json::to_value(trace).ok().map(Box::new),
            },
            other => other,
        }
    }

    pub fn is_assertion(&self) -> bool {
        matches!(self, Error::Assertion { .. })
    }
}
