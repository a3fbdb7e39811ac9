use thiserror::Error;

/// Errors raised by the constructions and checkers in this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("not an equivalence relation: {0} fails")]
    NotEquivalence(&'static str),
    #[error("square does not commute")]
    NotCommuting,
    #[error("category not finite within budget of {0} arrows")]
    CategoryBudget(usize),
    #[error("enumeration budget of {0} exceeded")]
    Budget(usize),
    #[error("root mismatch: term is rooted at `{found}` but the arrow has codomain `{expected}`")]
    RootMismatch { expected: String, found: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
