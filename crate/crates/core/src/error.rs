use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field order {0}: must be a prime or a power of two in [2, 65536]")]
    InvalidFieldOrder(u32),

    #[error("polynomial {poly:#x} is not irreducible of degree {degree} over GF(2)")]
    ReduciblePolynomial { poly: u32, degree: u32 },

    #[error("element {value} does not belong to GF({order})")]
    ElementOutOfRange { value: u32, order: u32 },

    #[error("operands belong to different fields")]
    FieldMismatch,

    #[error("zero has no multiplicative inverse")]
    ZeroInverse,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("degenerate code: generator has rank 0")]
    DegenerateCode,

    #[error("infeasible {what}: requires {required} but budget is {budget}")]
    Infeasible {
        what: &'static str,
        required: u128,
        budget: u128,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("net construction failed at level {level}: {condition} (after {attempts} attempts)")]
    RetryLimit {
        level: usize,
        condition: String,
        attempts: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

/// Fails with [`Error::Infeasible`] when `required` exceeds `budget`.
pub(crate) fn check_budget(what: &'static str, required: u128, budget: u128) -> Result<()> {
    if required > budget {
        Err(Error::Infeasible {
            what,
            required,
            budget,
        })
    } else {
        Ok(())
    }
}
