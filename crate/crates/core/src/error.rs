use crate::family::Subset;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("numeric domain error: {what} (offending value {value:e})")]
    NumericDomain { what: String, value: f64 },

    #[error("capacity exceeded: {what} (got {got}, limit {limit})")]
    Capacity { what: String, got: usize, limit: usize },

    #[error("weights are infeasible: subset {subset} has sum {sum} against dimension {dim}")]
    Infeasible { subset: Subset, sum: f64, dim: usize },

    #[error("weights are infeasible: sum of weights {sum} differs from dimension {dim}")]
    ScalingViolated { sum: f64, dim: usize },

    #[error("no critical subset: weights lie in the interior of the polytope")]
    NoCriticalSubset,

    #[error("weights are feasible: {0}")]
    Feasible(String),

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("family is not totally reducible for these weights (critical subset {certificate} does not split directly)")]
    NotTotallyReducible { certificate: Subset },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("accuracy error: {0}")]
    Accuracy(String),

    #[error("no convergence after {iterations} iterations: {detail}")]
    NonConvergence { iterations: usize, detail: String },

    #[error("at tree node {path}: {source}")]
    AtNode {
        path: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn at(self, path: &str) -> Self {
        match self {
            e @ Error::AtNode { .. } => e,
            e => Error::AtNode { path: path.to_string(), source: Box::new(e) },
        }
    }
}
