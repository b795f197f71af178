use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("stencil offsets must be distinct (duplicate offset {0})")]
    DuplicateOffsets(f64),

    #[error("derivative order {order} needs at least {} offsets, got {len}", order + 1)]
    OrderTooHigh { order: usize, len: usize },

    #[error("singular linear system")]
    Singular,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("CFL violation: dt/dx = {ratio} exceeds {max}")]
    Cfl { ratio: f64, max: f64 },

    #[error("length mismatch in {what}: expected {expected}, found {found}")]
    Length {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("horizon mismatch: expected {expected}, found {found}")]
    Horizon { expected: f64, found: f64 },

    #[error("time step mismatch: expected {expected}, found {found}")]
    TimeStep { expected: f64, found: f64 },

    #[error("Neumann data does not vanish at startup step {step} ({side} side, value {value:e})")]
    Startup {
        step: usize,
        side: &'static str,
        value: f64,
    },

    #[error("invalid medium: {0}")]
    Medium(String),

    #[error("control horizon {horizon} too short: extension support needs T >= {min}")]
    ControlSupport { horizon: f64, min: f64 },

    #[error("spectral parameter must be nonzero")]
    ZeroLambda,

    #[error("controls carry different spectral parameters ({0} vs {1})")]
    LambdaMismatch(f64, f64),

    #[error("no measured trace for probe {0}")]
    MissingTrace(String),

    #[error("unknown experiment id {0}")]
    UnknownExperiment(u8),

    #[error("invalid configuration: {0}")]
    Config(String),

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

    #[error("{path}: malformed data: {msg}")]
    Format { path: PathBuf, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }
}
