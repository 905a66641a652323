use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("parameters are not generic: {0}")]
    Genericity(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("pole: 1 - z q^{exponent} vanishes{context}")]
    Pole { exponent: i64, context: String },
    #[error("infinite products failed to cancel: {0}")]
    LedgerResidue(String),
    #[error("tail bound {bound} exceeds tolerance")]
    TailBound { bound: String },
    #[error("index out of range: {0}")]
    Range(String),
    #[error("unsupported specification: {0}")]
    Spec(String),
    #[error("spectral parameter z_{0} is zero")]
    ZeroParameter(usize),
    #[error("normalizing entry vanishes")]
    ZeroNormalizer,
    #[error("nullspace has dimension {0}, expected 1")]
    NullspaceDimension(usize),
    #[error("eigenvalues collide at the sample point: {0}")]
    DegenerateEigenvalues(String),
    #[error("truncation {cutoff} too small, need at least {needed}")]
    TruncationMargin { cutoff: usize, needed: usize },
    #[error("no lemma combination for {0}")]
    DerivationGap(String),
    #[error("cannot parse {0:?}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
