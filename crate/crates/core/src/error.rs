use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("certificate failed: {0}")]
    CertificateFailed(String),
    #[error("set is empty")]
    EmptySet,
    #[error("ordering length {length} exceeds what a finite set of {size} elements supports")]
    LengthExceedsSet { length: usize, size: usize },
    #[error("finite component at p={prime} has {size} elements, needs more than {degree}")]
    SetTooSmall { prime: u64, size: usize, degree: usize },
    #[error("characteristic module of degree {degree} is not finitely generated: {witness}")]
    NotFinitelyGenerated { degree: usize, witness: String },
    #[error("no adelic ordering of length {0} exists for this set")]
    NoAdelicOrdering(usize),
    #[error("polynomial of degree {degree} exceeds cap {cap}")]
    DegreeOverflow { degree: usize, cap: usize },
    #[error("series is not certified")]
    NotCertified,
    #[error("sup-norm identity violated: coefficients give {coeffs}, values give {values}")]
    SupNormMismatch { coeffs: String, values: String },
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("point is outside the domain: {0}")]
    NotInDomain(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Failures caused by running out of p-adic digits rather than by bad input.
    pub fn is_precision_failure(&self) -> bool {
        matches!(self, Error::PrecisionExhausted(_) | Error::CertificateFailed(_))
    }
}
