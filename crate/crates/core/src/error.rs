use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice spec: {0}")]
    InvalidSpec(String),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("spin {spin} out of range for q = {q}")]
    InvalidSpin { spin: u32, q: u32 },
    #[error("state space too large: {states} states exceeds the limit of {limit}")]
    StateSpaceTooLarge { states: f64, limit: f64 },
    #[error("blob grammar violated in column ({x}, {y}): {rule}")]
    Grammar { x: usize, y: usize, rule: String },
    #[error("pairing rejected: {0}")]
    Pairing(String),
    #[error("structural error: {0}")]
    Structural(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("measure is not translation invariant: translation ({dx}, {dy}) changes the weight of set {set:#x}")]
    NotTranslationInvariant { dx: usize, dy: usize, set: u64 },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
