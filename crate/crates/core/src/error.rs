use thiserror::Error;

/// Error type shared by all library operations.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A projection quantum number differs from its angular momentum by a
    /// non-integer (e.g. j = 1 with m = 1/2).
    #[error("inconsistent half-integer parity: {0}")]
    Parity(String),

    /// A projection lies outside the allowed -j..j range.
    #[error("projection out of range: {0}")]
    Projection(String),

    /// A transition specification violates a coupling rule.
    #[error("invalid transition: {0}")]
    Transition(String),

    /// Beam parameters outside their domain.
    #[error("invalid beam: {0}")]
    Beam(String),

    /// Geometry parameters outside their domain.
    #[error("invalid geometry: {0}")]
    Geometry(String),

    /// The requested combination is not covered by this operation.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
