use num_rational::BigRational;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("precision must be nonnegative, got {0}")]
    NegativePrecision(BigRational),

    #[error("logarithm argument must be at least 1, got {0}")]
    LogArgumentBelowOne(BigRational),

    #[error("derivative order {order} exceeds polynomial degree {degree}")]
    DerivativeOrderTooHigh { order: u32, degree: u32 },

    #[error("argument {0} lies outside the principal Lambert W domain [-1/e, inf)")]
    LambertDomain(BigRational),

    #[error("fixed point has no guarantee: k*beta*alpha^k = {0} exceeds 1/3")]
    FixedPointUnbounded(BigRational),

    #[error("divergence hypothesis does not hold for the query")]
    DivergenceHypothesis,

    #[error("recurrence ratio must exceed 1, got {0}")]
    RatioNotAboveOne(BigRational),

    #[error("precision exponent mu must be at least 2, got {0}")]
    PrecisionTooLow(u64),

    #[error("time horizon must be positive, got {0}")]
    NonPositiveHorizon(BigRational),

    #[error("schedule requires deg p >= 1")]
    ConstantField,

    #[error("{name} must be nonnegative, got {value}")]
    Negative { name: &'static str, value: BigRational },

    #[error("{name} must be at least 1")]
    ZeroCount { name: &'static str },

    #[error("guarantee check failed: accumulated bound {bound} exceeds target {target}")]
    GuaranteeCheck { bound: String, target: String },

    #[error("working precision did not reach the requested enclosure after {0} attempts")]
    PrecisionExhausted(u32),
}
