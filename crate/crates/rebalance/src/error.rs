use thiserror::Error;

/// Errors produced by dataset construction, samplers, learners and the
/// benchmark harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter is out of range or inconsistent.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The imbalance ratio |S|/|L| is undefined because the majority
    /// class is empty.
    #[error("imbalance ratio undefined: majority class is empty")]
    RatioUndefined,

    /// A class required by the operation has no points.
    #[error("class has no points: {0}")]
    EmptyClass(&'static str),

    /// Feature dimension of an input does not match the model or dataset.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// An iterative procedure ran out of its iteration budget.
    #[error("no convergence after {iters} iterations ({context}; last objective {last_value:.6e}, last decrease {last_decrease:.3e})")]
    NonConvergence {
        context: &'static str,
        iters: usize,
        last_value: f64,
        last_decrease: f64,
    },

    /// Malformed dataset, model or report file.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
