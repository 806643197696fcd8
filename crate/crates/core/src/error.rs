use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every module.
///
/// Precision problems are kept apart from domain problems so that callers
/// can decide whether retrying with a higher ceiling makes sense.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("precision exhausted at {bits} bits while {what}")]
    PrecisionExhausted { what: String, bits: u32 },

    /// A strict comparison between two orbit times could not be certified.
    #[error("comparison between times {t} and {t_prime} undecided at {bits} bits")]
    Undecided { t: u64, t_prime: u64, bits: u32 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("scan bound {have} does not cover requested truncation {need}")]
    InsufficientScanBound { have: u64, need: u64 },

    #[error("no admissible n_{k} found within bound {bound}")]
    NoAdmissible { k: usize, bound: String },

    #[error("certificate refuted at K={k} ({bits} bits): {detail}")]
    Refuted { k: usize, bits: u32, detail: String },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    pub fn exhausted(what: impl Into<String>, bits: u32) -> Self {
        Error::PrecisionExhausted {
            what: what.into(),
            bits,
        }
    }

    /// True for errors that a higher precision ceiling might resolve.
    pub fn is_precision(&self) -> bool {
        matches!(
            self,
            Error::PrecisionExhausted { .. } | Error::Undecided { .. }
        )
    }
}
