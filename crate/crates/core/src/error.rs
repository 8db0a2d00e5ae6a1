use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("environment needs at least 4 cells, got {0}")]
    TooFewCells(usize),

    #[error("steepness must be positive and finite, got {0}")]
    BadSteepness(f64),

    #[error("step must be -1, 0 or +1, got {0}")]
    BadDelta(i32),

    #[error("start cell {start} outside world of {cells} cells")]
    BadStart { start: usize, cells: usize },

    #[error("{substrate} genome needs {expected} genes, got {actual}")]
    GeneCount {
        substrate: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("non-finite gene at index {0}")]
    NonFiniteGene(usize),

    #[error("time constant at node {node} must be positive, got {value}")]
    BadTau { node: usize, value: f64 },

    #[error("integration step must be positive and finite, got {0}")]
    BadStep(f64),

    #[error("inner integration steps must be at least 1")]
    NoInnerSteps,

    #[error("expected a {expected} genome, found {found}")]
    SubstrateMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("malformed genome file: {0}")]
    GenomeFormat(String),

    #[error("invalid GA configuration: {0}")]
    Config(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("malformed trace file: {0}")]
    TraceFormat(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
