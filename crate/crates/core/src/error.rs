use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value at sample {index}")]
    NonFinite { index: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unstable filter: denominator {den:?} has a root with non-negative real part")]
    UnstableFilter { den: Vec<f64> },

    #[error("improper filter: numerator degree {num} exceeds denominator degree {den}")]
    ImproperFilter { num: usize, den: usize },

    #[error("negative delay {0}")]
    NegativeDelay(f64),

    #[error("delay policy EvaluateAnalytic needs an analytic input")]
    DelayPolicy,

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix size {0} exceeds the supported maximum of {max}", max = crate::matalg::MAX_DIM)]
    TooLarge(usize),

    #[error("matrix is rank deficient (numerical rank {rank})")]
    RankDeficient { rank: usize },

    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("interval [{from}, {to}] is outside the grid span [{start}, {end}]")]
    Interval {
        from: f64,
        to: f64,
        start: f64,
        end: f64,
    },

    #[error("gain must be positive, got {0}")]
    NonPositiveGain(f64),

    #[error("monotonicity violated at theta = {theta:?} (margin {margin:.3e})")]
    NotMonotone { theta: Vec<f64>, margin: f64 },

    #[error("assumption violated: {0}")]
    Assumption(String),

    #[error("missing evaluator: {0}")]
    MissingEvaluator(&'static str),

    #[error("numerical abort: non-finite state at sample {sample}")]
    NumericalAbort { sample: usize },

    #[error("scenario validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("unknown built-in {0}")]
    UnknownBuiltin(String),

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

    #[error("config parse error: {0}")]
    Config(#[from] serde_json::Error),
}
