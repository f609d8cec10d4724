use std::fmt;

use thiserror::Error;

/// A single failed structural invariant of an algebra spec.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub invariant: &'static str,
    /// Offending basis indices (empty when the invariant is global).
    pub indices: Vec<usize>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.invariant)?;
        if !self.indices.is_empty() {
            write!(f, " at basis indices {:?}", self.indices)?;
        }
        write!(f, ": {}", self.detail)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid order n = {0}: need n >= 2")]
    InvalidOrder(usize),

    #[error("failed to parse algebra spec: {0}")]
    Parse(String),

    #[error("algebra spec violates {} invariant(s): {}", .0.len(), join_violations(.0))]
    Invariant(Vec<Violation>),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operation requires an associative algebra, but `{0}` is not associative")]
    NotAssociative(String),

    #[error("point is not on the phase space `{space}` (residual {residual:e})")]
    OffSpace { space: String, residual: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("splitting regions do not partition the basis degrees: {0}")]
    BadSplitting(String),

    #[error("singular form Gram matrix")]
    SingularGram,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
