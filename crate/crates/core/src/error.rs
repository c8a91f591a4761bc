use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// Evaluation errors (`OutOfBound`, `Budget`, `InvalidLetter`) can surface from
/// inside an objective's approximation procedure; the rest come from parsing and
/// validation of user-supplied specifications.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid {what}: {message}")]
    Validation { what: &'static str, message: String },

    /// A [`BoundedProbe`](crate::word::BoundedProbe) saw a read at or past its bound.
    #[error("read of index {index} exceeds bound {bound}")]
    OutOfBound { index: usize, bound: usize },

    #[error("{what} budget exceeded: need {needed}, cap is {cap}{}", context.as_deref().map(|c| format!(" ({c})")).unwrap_or_default())]
    Budget {
        what: &'static str,
        needed: String,
        cap: u64,
        context: Option<String>,
    },

    #[error("symbol {symbol} is not in alphabet of size {size}")]
    InvalidLetter { symbol: u32, size: u64 },

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("labeling codomain mismatch: {0}")]
    CodomainMismatch(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(what: &'static str, message: impl Into<String>) -> Self {
        Error::Validation {
            what,
            message: message.into(),
        }
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget { .. })
    }

    pub fn is_parse_or_validation(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Validation { .. }
                | Error::AlphabetMismatch(_)
                | Error::CodomainMismatch(_)
                | Error::Unknown { .. }
                | Error::InvalidLetter { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
