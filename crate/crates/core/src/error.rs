use thiserror::Error;

/// Errors produced by the library.
///
/// The CLI maps these onto exit codes: usage and parse errors exit with 2,
/// resource and construction failures with 3.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),

    #[error("semiring mismatch: {0}")]
    SemiringMismatch(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("skewness violated at gate {gate}: neither operand has at most {d} monomials")]
    Skewness { gate: String, d: usize },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("family construction failed: {0}")]
    Construction(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
