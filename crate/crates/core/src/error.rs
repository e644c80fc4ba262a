use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid ring: {0}")]
    InvalidRing(String),
    #[error("{value} is not an element of {ring}")]
    NotInRing { value: String, ring: String },
    #[error("{value} is not divisible by {divisor} in {ring}")]
    NotDivisible {
        value: String,
        divisor: String,
        ring: String,
    },
    #[error("division of {value} by {divisor} is not unique in {ring}")]
    NotUnique {
        value: String,
        divisor: String,
        ring: String,
    },
    #[error("operation {op} is not supported over {ring}")]
    UnsupportedRing { op: &'static str, ring: String },
    #[error("ring mismatch: {left} vs {right}")]
    RingMismatch { left: String, right: String },

    #[error("profile must have a positive bound, got {0}")]
    EmptyProfile(u64),
    #[error("set is not divisor-stable: {divisor} divides {index} but is missing")]
    NotDivisorStable { divisor: u64, index: u64 },
    #[error("profile mismatch: expected {expected}, got {actual}")]
    ProfileMismatch { expected: String, actual: String },
    #[error("frobenius F_{0} has an empty output profile")]
    EmptyOutputProfile(u64),
    #[error("expected {expected} components, got {actual}")]
    ComponentCount { expected: usize, actual: usize },

    #[error("ghost vector is not in the image of the ghost map (index {index})")]
    NotInGhostImage { index: u64 },
    #[error("ghost inversion is ambiguous at index {index}: the ring has {index}-torsion")]
    AmbiguousDivision { index: u64 },

    #[error("non-integral coefficient {coeff} in {poly}")]
    IntegralityViolation { poly: String, coeff: String },
    #[error("coefficient {coeff} of {poly} is not {p}-integral")]
    PIntegralityViolation { poly: String, p: u64, coeff: String },
    #[error("index {index} exceeds the universal polynomial cap {cap}")]
    CapExceeded { index: u64, cap: u64 },
    #[error("division failed in the recursion for index {index}: {detail}")]
    DivisibilityViolation { index: u64, detail: String },

    #[error("series must have constant term 1")]
    NotUnitSeries,
    #[error("series orders differ: {0} vs {1}")]
    OrderMismatch(usize, usize),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Parse failures map to a different CLI exit code than domain errors.
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse(_))
    }
}
