use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("simulation diverged at tick {tick}")]
    Diverged { tick: u64 },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("checkpoint dimension mismatch for {network}: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        network: &'static str,
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("unknown joint `{name}`; valid joints: {}", valid.join(", "))]
    UnknownJoint { name: String, valid: Vec<String> },

    #[error("trajectories have no overlapping window")]
    EmptyOverlap,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
