//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its documented domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    /// An input exceeds a hard size guard.
    #[error("input too large for {what}: {reason}")]
    TooLarge { what: &'static str, reason: String },

    /// An experiment would exceed the configured cell limit.
    #[error("resource guard: {0}")]
    ResourceGuard(String),

    /// An operation requiring a partial matching was handed a graph with a
    /// node of degree two or more.
    #[error("not a partial matching: node {node} in class {class} has degree {degree}")]
    NotAMatching { class: char, node: u32, degree: u32 },

    /// A structured input violates its invariants.
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
