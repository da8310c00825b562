use num_rational::BigRational;

pub type Result<T> = std::result::Result<T, Error>;

/// Unified error type. Variants map onto the CLI exit codes: usage-type
/// errors exit 2, precision-type errors exit 3.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("cyclotomic order mismatch: {0} vs {1}")]
    OrderMismatch(u32, u32),

    #[error("cannot lift Q(zeta_{from_order}) into Q(zeta_{target}): {from_order} does not divide {target}")]
    BadLift { from_order: u32, target: u32 },

    #[error("division by zero in Q(zeta_{0})")]
    DivisionByZero(u32),

    #[error("sigma_{d} is not defined on Q(zeta_{m}): gcd(d, {m}) != 1")]
    BadSigma { d: i64, m: u32 },

    #[error("invalid index vector: {0}")]
    BadIndex(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("precision loss: {0}")]
    PrecisionLoss(String),

    #[error("series is zero to precision; raise the truncation order")]
    ZeroToPrecision,

    #[error("not a polynomial in j: nonzero residual coefficient at exponent {exponent}")]
    NotAJPolynomial { exponent: BigRational },

    #[error("internal consistency failure: {0}")]
    Inconsistency(String),

    #[error("member value at the CM point is numerically zero ({0}); the generation hypothesis fails")]
    ZeroValue(String),
}

impl Error {
    /// Exit code for the CLI: 2 for usage errors, 3 for precision errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::OrderMismatch(..)
            | Error::BadLift { .. }
            | Error::DivisionByZero(..)
            | Error::BadSigma { .. }
            | Error::BadIndex(..)
            | Error::Usage(..) => 2,
            Error::PrecisionLoss(..)
            | Error::ZeroToPrecision
            | Error::NotAJPolynomial { .. }
            | Error::ZeroValue(..) => 3,
            Error::Inconsistency(..) => 1,
        }
    }
}
