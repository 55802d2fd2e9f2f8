use thiserror::Error;

/// Errors raised by the algebra, presentation and witness layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("modulus mismatch: {left} vs {right}")]
    Modulus { left: u32, right: u32 },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("no graded image: the identity has infinite filtration level")]
    NoGradedImage,
    #[error("commutator equation has no solution at level {level}")]
    NoSolutionAtLevel { level: usize },
    #[error("exponent precision too low: target needs p^{needed}, presentation carries p^{have}")]
    PrecisionTooLow { needed: u32, have: u32 },
    #[error("triviality condition fails at index {index}")]
    TrivialityFails { index: usize },
    #[error("non-Kummerian input: cyclic recipe violates relator {relator}")]
    NonKummerian { relator: usize },
    #[error("mixed semidirect case under triviality (cup formula inconsistency)")]
    MixedSemidirectCase,
    #[error("no witness found: search exhausted after {nodes} level-solutions (budget {budget})")]
    SearchExhausted { nodes: u64, budget: u64 },
    #[error("resource bound exceeded: {0}")]
    Resource(String),
    #[error("massey product not defined: {0}")]
    NotDefined(String),
    #[error("internal consistency error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
