use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside the domain where the quantity is defined.
    #[error("invalid parameter {name} = {value}: {requirement}")]
    Domain {
        name: &'static str,
        value: String,
        requirement: &'static str,
    },

    /// An enumeration or table size guard refused the request.
    #[error("{what} = {value} exceeds the guard limit {limit}")]
    Guard {
        what: &'static str,
        value: u64,
        limit: u64,
    },

    #[error("truncation at M = {m_max} only captures mass {achieved_mass:e}; increase truncation")]
    Truncation { m_max: usize, achieved_mass: f64 },

    #[error("path must start at 0 (starts at {0})")]
    NotAnchored(i64),

    #[error("invalid lattice path: {0}")]
    InvalidPath(String),

    #[error("functional is not Markov additive and cannot be driven by a transfer recursion")]
    NonMarkovian,

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: impl ToString, requirement: &'static str) -> Self {
        Error::Domain {
            name,
            value: value.to_string(),
            requirement,
        }
    }

    pub(crate) fn guard(what: &'static str, value: impl TryInto<u64>, limit: u64) -> Self {
        Error::Guard {
            what,
            value: value.try_into().unwrap_or(u64::MAX),
            limit,
        }
    }

    /// True for refusals caused by size guards rather than bad input.
    pub fn is_guard(&self) -> bool {
        matches!(self, Error::Guard { .. })
    }
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(name, value, "must be finite and > 0"))
    }
}
