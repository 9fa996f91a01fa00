use num_rational::BigRational;

/// Errors surfaced by the exact arithmetic core and the spin-space layers built on it.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Two exact radicals whose quotient is not the square of a rational cannot be
    /// summed inside the sign * sqrt(p/q) representation.
    #[error("incommensurable radicals: sqrt({left}) + sqrt({right}) leaves the representation")]
    IncommensurableRadicals { left: BigRational, right: BigRational },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
