use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("kind mismatch: expected {expected}, found {found}")]
    KindMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("shape mismatch: expected {expected} entries, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("newton solver did not converge after {iterations} iterations (residual history {history:?})")]
    NoConvergence {
        iterations: usize,
        history: Vec<f64>,
    },

    #[error("newton iteration diverged: non-finite residual at iteration {iteration}")]
    Diverged { iteration: usize },

    #[error("linear solver failure: {0}")]
    LinearSolver(String),

    #[error("solver failed at step {step}: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid time stepping parameters: {0}")]
    InvalidTimeStep(String),

    #[error("magnetic potential is inconsistent: closure defect {defect:e} exceeds {tolerance:e}")]
    InconsistentPotential { defect: f64, tolerance: f64 },

    #[error("no dominant spatial mode in probe series (peak/median ratio {ratio:.3})")]
    NoDominantMode { ratio: f64 },

    #[error("no dominant propagation direction (amplitude modulation {modulation:.3})")]
    NoDominantDirection { modulation: f64 },

    #[error("probe series too short: {0}")]
    ShortSeries(String),

    #[error("invalid case setup: {0}")]
    InvalidCase(String),

    #[error("config parse error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("duplicate key `{key}` at lines {first} and {second}")]
    DuplicateKey {
        key: String,
        first: usize,
        second: usize,
    },

    #[error("invalid config value for `{field}`: {message}")]
    ConfigValue { field: String, message: String },

    #[error("snapshot format error: {0}")]
    Snapshot(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for the command line driver: 1 for configuration
    /// problems, 2 for solver failures, 3 for i/o problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConfigParse { .. }
            | Error::DuplicateKey { .. }
            | Error::ConfigValue { .. }
            | Error::InvalidGrid(_)
            | Error::InvalidCase(_)
            | Error::InvalidTimeStep(_) => 1,
            Error::Io { .. } | Error::Snapshot(_) => 3,
            Error::StepFailed { source, .. } => source.exit_code().max(2),
            _ => 2,
        }
    }
}
