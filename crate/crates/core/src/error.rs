use thiserror::Error;

/// Errors raised by the quartic-form library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuarticError {
    #[error("discriminant is zero")]
    DegenerateDiscriminant,
    #[error("form is not generic (reducible form or reducible resolvent cubic)")]
    NotGeneric,
    #[error("form has no multiple root modulo {0}")]
    NotRamified(u64),
    #[error("prime {0} is not supported by this operation")]
    UnsupportedPrime(u64),
    #[error("could not factor {0} within the configured effort")]
    FactorizationFailure(String),
    #[error("computation of size {size} exceeds the budget {budget}")]
    InfeasibleSize { size: u128, budget: u128 },
    #[error("numerical methods failed to agree: {0}")]
    NonConvergence(String),
    #[error("not enough data: {0}")]
    InsufficientData(String),
    #[error("integer overflow in fixed-width arithmetic")]
    Overflow,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, QuarticError>;
