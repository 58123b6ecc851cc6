use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} coordinates, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid Minkowski order p = {0} (must be >= 1)")]
    InvalidMetric(f64),

    #[error("need at least {needed} points, got {found}")]
    TooFewPoints { needed: usize, found: usize },

    #[error("point {index} has a non-finite coordinate")]
    NonFinite { index: usize },

    #[error("point {point}: encoded distance {code} needs {width} qubits, cap is {cap}; lower the scale")]
    RegisterOverflow {
        point: usize,
        code: u64,
        width: u32,
        cap: u32,
    },

    #[error("register of {total} qubits exceeds the cap of {cap}")]
    RegisterTooWide { total: u32, cap: u32 },

    #[error("code {code} does not fit in {n} qubits")]
    CodeOutOfRange { code: u64, n: u32 },

    #[error("empty code set")]
    EmptyCodeSet,

    #[error("effect annihilates state")]
    EffectAnnihilates,

    #[error("code {0} has zero outcome probability")]
    MissingOutcome(u64),

    #[error("target of {target} clusters exceeds the {available} distinct codes available")]
    UnreachableTarget { target: usize, available: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("feature {0} has zero variance and cannot be standardized")]
    ZeroVariance(usize),

    #[error("scatter plots need 2-D points, dataset has {0} dimensions; project with PCA first")]
    NotTwoDimensional(usize),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}
