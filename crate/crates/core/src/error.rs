use thiserror::Error;

/// Errors surfaced by the library operations.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("oracle scale exceeded: {assignments} assignments over cap {cap}")]
    ScaleExceeded { assignments: u128, cap: u64 },

    #[error("variable {var} has no unary scope in the structure")]
    MissingUnaryScope { var: usize },

    #[error("scope index {index} has arity {arity}, but a binary structure is required")]
    NonBinaryStructure { index: usize, arity: usize },

    #[error("removal set is empty")]
    EmptyRemoval,

    #[error("removal set is not contained in the instance")]
    RemovalNotAllowed,

    #[error("index set is empty or out of range")]
    BadIndexSet,

    #[error("trace step {step} overlaps a previously removed tuple set")]
    OverlappingRemovals { step: usize },

    #[error("scope {scope:?} is not part of the trace removals")]
    ScopeNotInTrace { scope: Vec<usize> },

    #[error("optimal assignments are not all solutions of the given instance")]
    OptimaNotCovered,

    #[error("bound ordering violated: expected worst >= method >= best")]
    BoundOrdering,

    #[error("step size is not unbounded-safe: beta and gamma are both infinite")]
    UnboundedStep,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
