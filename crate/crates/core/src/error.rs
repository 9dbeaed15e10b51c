use thiserror::Error;

/// Errors raised across the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported instruction at line {line}: {mnemonic}")]
    Unsupported { line: usize, mnemonic: String },

    #[error("illegal instruction `{mnemonic}`: {reason}")]
    Illegal { mnemonic: String, reason: String },

    #[error("memory fault: access of {len} bytes at {addr:#x}")]
    MemoryFault { addr: u64, len: usize },

    #[error("index out of bounds: {0}")]
    Bounds(String),

    #[error("simulation deadlock at cycle {cycle}: {state}")]
    Deadlock { cycle: u64, state: String },

    #[error("unknown kernel `{0}`")]
    UnknownKernel(String),

    #[error("result mismatch: {0}")]
    Mismatch(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("unknown lane count {0}")]
    UnknownLanes(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn illegal(mnemonic: &str, reason: impl Into<String>) -> Self {
        Error::Illegal {
            mnemonic: mnemonic.to_string(),
            reason: reason.into(),
        }
    }
}
