use thiserror::Error;

use crate::oracle::OracleError;

#[derive(Debug, Error)]
pub enum QhornError {
    #[error("arity {0} out of range 1..=20")]
    ArityOutOfRange(usize),
    #[error("variables {set:?} out of range for arity {n}")]
    VarOutOfRange { set: Vec<usize>, n: usize },
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("invalid tuple {0:?}: expected 1 to 20 characters of '0'/'1'")]
    InvalidTuple(String),
    #[error("question has no tuples to infer its arity from")]
    EmptyQuestion,
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("cannot parse query: {0}")]
    ParseQuery(String),
    #[error("query is not in class {0}")]
    ClassViolation(&'static str),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("causal density cap exceeded: head x{head} has more than {cap} bodies")]
    CausalDensityCap { head: usize, cap: usize },
    #[error("inconsistent oracle answers: {0}")]
    Inconsistent(String),
    #[error("exhaustive equivalence needs n <= 4, got {0}")]
    BruteforceArity(usize),
    #[error("no non-equivalent mutant found after {0} attempts")]
    MutationExhausted(usize),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl QhornError {
    /// True when the run stopped because its oracle went away.
    pub fn is_oracle_closed(&self) -> bool {
        matches!(self, QhornError::Oracle(OracleError::Closed))
    }
}
