use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("no integer coefficients (a,b,c,d) fit the image lengths and sums")]
    NotLinear,
    #[error("image of seed {0} does not start with {0}")]
    NotProlongable(u8),
    #[error("letter {0} is outside the morphism's domain alphabet")]
    LetterOutsideDomain(u8),
    #[error("factor set did not stabilize within {cap} iterations")]
    NonStabilizing { cap: u32 },
    #[error("incidence matrix is not primitive")]
    NotPrimitive,
    #[error("morphism matrix is singular")]
    SingularMatrix,
    #[error("template closure exceeded the cap of {cap} templates")]
    CapExceeded { cap: usize },
    #[error("search exceeded the node budget of {cap}")]
    SearchBudgetExceeded { cap: u64 },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("power order k must be at least 2, got {0}")]
    BadPowerOrder(usize),
    #[error("word is empty")]
    EmptyWord,
    #[error("image set of letter {0} mixes Parikh vectors")]
    ParikhClassViolation(u8),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid parameter: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
