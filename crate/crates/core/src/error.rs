use thiserror::Error;

/// Errors raised by the expectation operators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Two objects that must live on the same outcome space do not.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A probability vector, random variable or set failed its invariants.
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    /// Separation was requested for a point that belongs to the set.
    #[error("member: point lies in the credal set, conjugate value is zero")]
    Member,

    /// Generator enumeration or tree construction exceeded its hard limit.
    #[error("size guard exceeded: {what} needs {count} items, limit is {limit}")]
    SizeGuard {
        what: &'static str,
        count: u128,
        limit: u128,
    },

    /// Internal LP failure (unbounded where bounded was expected, pivot breakdown).
    #[error("linear program: {0}")]
    Lp(String),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
