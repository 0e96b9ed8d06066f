use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("idempotent family is empty")]
    EmptyFamily,
    #[error("multiplication is not associative on basis triple ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),
    #[error("no upper bound for {0} and {1}")]
    NoUpperBound(String, String),
    #[error("retraction onto {i} depends on the upper bound chosen for {k}")]
    IndependenceFailure { i: String, k: String },
    #[error("transition {0} is not a coring morphism: {1}")]
    NotNatural(String, String),
    #[error("not finitely generated projective: {0}")]
    NotFGProjective(String),
    #[error("{0} does not respect the balancing relations")]
    WellDefinedness(String),
    #[error("{0} depends on the chosen index")]
    IndexDependence(String),
    #[error("context law {law} fails at {at}")]
    LawFailure { law: String, at: String },
    #[error("idempotent {0} is not central")]
    NotCentral(String),
    #[error("unit for {0} leaves the cotensor product")]
    CotensorMembership(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("transition {0} is not colinear")]
    NotColinearTransitions(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid data: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
