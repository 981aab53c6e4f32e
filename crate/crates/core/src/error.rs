use crate::solution::Solution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed or out-of-range input (bad vertex id, bad parameter, failed precondition).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The caller broke an operation contract, e.g. asked to remove a forbidden element.
    #[error("contract violation: {0}")]
    Contract(String),

    /// No set of removable elements separates the targeted pairs.
    #[error("infeasible instance: {0}")]
    Infeasible(String),

    /// A configured resource budget (paths, LP pivots, search nodes, iterations) ran out.
    #[error("{resource} budget exceeded: {detail}")]
    Budget {
        resource: &'static str,
        detail: String,
        /// Best solution known when the budget ran out, if the solver tracks one.
        incumbent: Option<Box<Solution>>,
    },

    #[error("wall-clock budget exhausted")]
    Timeout,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn budget(resource: &'static str, detail: impl Into<String>) -> Self {
        Error::Budget {
            resource,
            detail: detail.into(),
            incumbent: None,
        }
    }

    /// True for errors that come from a budget or deadline rather than bad input.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Budget { .. } | Error::Timeout)
    }
}
