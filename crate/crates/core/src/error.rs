use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("frequency prefix has {available} entries but {required} are required")]
    PrefixTooShort { available: usize, required: usize },

    #[error("tail bound unavailable: torus has no tail rule beyond radius {head_len}")]
    TailBoundUnavailable { head_len: usize },

    /// The requested tolerance cannot be met because the frozen tail alone
    /// contributes more than `eps` to every distance bound.
    #[error("eps = {eps} is not above the tail budget; minimal feasible eps is {min_eps}")]
    ToleranceBelowTail { eps: f64, min_eps: f64 },

    #[error("input precision insufficient: worst-case residual error {error_bound:e} is not below tol = {tol:e}")]
    InsufficientPrecision { error_bound: f64, tol: f64 },

    #[error("tori differ")]
    TorusMismatch,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
