use thiserror::Error;

use crate::nnf::VarId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op} node needs at least one child")]
    EmptyArity { op: &'static str },

    #[error("assignment has no value for {0}")]
    MissingVariable(VarId),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("solver resource limit reached ({0})")]
    Timeout(String),

    #[error("invalid function definitions: {0}")]
    InvalidDefs(String),

    #[error("signature mismatch: {0}")]
    Signature(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub fn is_timeout(&self) -> bool {
        matches!(self, Error::Timeout(_))
    }
}
