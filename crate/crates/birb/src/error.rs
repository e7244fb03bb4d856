use thiserror::Error;

/// Error type shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    /// Two operands were defined on different qubit counts.
    #[error("dimension mismatch: {0}-qubit and {1}-qubit operands")]
    DimensionMismatch(usize, usize),

    /// A qubit index fell outside `0..n` or was repeated in a gate support.
    #[error("invalid qubit index {index} for {n} qubits: {reason}")]
    InvalidIndex {
        index: usize,
        n: usize,
        reason: &'static str,
    },

    /// An argument violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration file or spec was structurally invalid.
    #[error("configuration error: {0}")]
    Config(String),

    /// Text or JSON input could not be parsed. Positions are 1-based.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// The request exceeded a documented capability limit (e.g. dense-engine
    /// qubit cap). The message includes a remediation hint where one exists.
    #[error("capability error: {0}")]
    Capability(String),

    /// A decay fit could not produce a usable estimate.
    #[error("fit failure: {0}")]
    FitFailure(String),

    /// Numerical failure (non-finite values, failed eigendecomposition, ...).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// I/O failure while reading or writing artifacts.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn capability(msg: impl Into<String>) -> Self {
        Error::Capability(msg.into())
    }

    pub(crate) fn dimension(expected: usize, got: usize) -> Self {
        Error::DimensionMismatch(expected, got)
    }

    pub(crate) fn invalid_index(index: usize, n: usize) -> Self {
        Error::InvalidIndex {
            index,
            n,
            reason: "out of range",
        }
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub(crate) fn fit_failure(msg: impl Into<String>) -> Self {
        Error::FitFailure(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
