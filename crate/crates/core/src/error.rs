use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lag {tau}: series has only {len} samples")]
    InvalidLag { tau: usize, len: usize },

    #[error("component {index} has length {found}, expected {expected}")]
    Alignment {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("symbol {symbol} at position {position} is outside alphabet of size {alphabet_size}")]
    SymbolOutOfRange {
        symbol: usize,
        position: usize,
        alphabet_size: usize,
    },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("expected {expected} players, got {found}")]
    WrongArity { expected: usize, found: usize },

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("no pure Nash equilibrium")]
    NoPureEquilibrium,

    #[error("message {0} has zero probability under every latent type")]
    ZeroEvidence(usize),

    #[error("divergence is infinite: p({index}) > 0 where q({index}) = 0")]
    InfiniteDivergence { index: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
