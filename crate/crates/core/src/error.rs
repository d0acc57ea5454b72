use crate::model::{FlowId, Nanos};

/// Errors surfaced by detectors, the simulator, analysis and the harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("stream order violated: packet at {got} ns after {prev} ns")]
    StreamOrder { prev: Nanos, got: Nanos },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("trace line {line}: {msg}")]
    Parse { line: u64, msg: String },

    #[error("blacklist capacity {capacity} exhausted inserting flow {flow}")]
    BlacklistFull { capacity: usize, flow: FlowId },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

impl Error {
    /// Process exit code: 2 configuration, 3 I/O or trace input, 4 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) => 2,
            Error::Io(_) | Error::Parse { .. } => 3,
            Error::StreamOrder { .. } | Error::BlacklistFull { .. } | Error::Invariant(_) => 4,
        }
    }
}
