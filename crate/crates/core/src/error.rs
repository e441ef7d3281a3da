use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoeffError {
    #[error("inverse of zero")]
    ZeroInverse,
    #[error("element {0} is a zero divisor")]
    NotInvertible(String),
    #[error("numeric evaluation outside the domain: {0}")]
    Domain(String),
    #[error("cannot parse coefficient text {0:?}")]
    Parse(String),
    #[error("invalid model parameters: {0}")]
    Params(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error("not a total x-derivative: {0}")]
    NonLocal(String),
    #[error("no evolution rule for {0:?}")]
    MissingEvolution(Vec<String>),
    #[error("secular term survives: {0}")]
    SecularResidue(String),
    #[error("series expansion point is not the expected constant: {0}")]
    ExpansionPoint(String),
    #[error("dispersion relation: {0}")]
    Dispersion(String),
    #[error("the linear system is inconsistent: {0}")]
    InconsistentSystem(String),
    #[error("numerical integration became unstable: {0}")]
    Stability(String),
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("index out of range: {0}")]
    Index(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("reduction invariant violated: {0}")]
    Invariant(String),
    #[error("cannot parse {0:?}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
