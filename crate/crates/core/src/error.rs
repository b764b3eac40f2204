use alloc::boxed::Box;
use alloc::string::String;

use crate::mpoly::MPoly;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("division is not exact, remainder {remainder}")]
    NotDivisible { remainder: Box<MPoly> },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("rational map is undefined at {point}")]
    Indeterminacy { point: String },
    #[error("class is not a pullback of a multiple of E_Y")]
    NotPushforward,
    #[error("no intersection rule for {0}")]
    NoRule(String),
}

impl Error {
    /// Short machine tag used in ERROR reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Usage(_) => "usage",
            Error::Resource(_) => "resource",
            Error::NotDivisible { .. } => "divisibility",
            Error::Degenerate(_) => "degenerate",
            Error::Indeterminacy { .. } => "indeterminacy",
            Error::NotPushforward => "not-pushforward",
            Error::NoRule(_) => "no-rule",
        }
    }
}
