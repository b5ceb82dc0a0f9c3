use thiserror::Error;

/// Errors raised by the 2-adic toolkit.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is even and has no inverse modulo a power of two")]
    EvenResidue(String),

    #[error("denominator {0} is even; only rationals with odd denominator are 2-adic integers")]
    EvenDenominator(String),

    #[error("zero denominator")]
    ZeroDenominator,

    #[error("precision must be at least {needed} bits, got {available}")]
    InsufficientPrecision { needed: u64, available: u64 },

    #[error("precision {0} exceeds the 64-bit residue limit")]
    ResidueTooWide(u32),

    #[error("level {level} exceeds the configured maximum {max}")]
    LevelTooLarge { level: u32, max: u32 },

    #[error("guard violated: {0}")]
    GuardViolation(String),

    #[error("cannot parse {input:?}: {reason}")]
    Parse { input: String, reason: String },

    #[error("value is not known exactly: {0}")]
    Inexact(String),

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("output failed: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(input: &str, reason: impl Into<String>) -> Self {
        Error::Parse {
            input: input.to_owned(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
