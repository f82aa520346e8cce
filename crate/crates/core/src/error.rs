use std::fmt;

use crate::instance::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid instance: {}", ViolationList(.0))]
    InvalidInstance(Vec<Violation>),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("no value for agent v{agent}")]
    MissingValue { agent: usize },

    #[error("instance is not normalized: {0}")]
    NotNormalized(String),

    #[error("instance is not a tree")]
    NotATree,

    #[error("degenerate instance: {0}")]
    Degenerate(String),

    #[error("unbounded agents (no constraint): {agents:?}")]
    Unbounded { agents: Vec<usize> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("linear program is unbounded")]
    UnboundedLp,
}

struct ViolationList<'a>(&'a [Violation]);

impl fmt::Display for ViolationList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, v) in self.0.iter().enumerate() {
            if n > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}
