use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Problem size beyond what this build supports (qubits, matrix dimension).
    #[error("capacity exceeded: {what} = {value} (limit {limit})")]
    Capacity {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    Index { index: usize, num_qubits: usize },

    #[error("validation error: {0}")]
    Validation(String),

    /// Text-format parse failure; `line` is 1-based.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("configuration error: {0}")]
    Configuration(String),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}
