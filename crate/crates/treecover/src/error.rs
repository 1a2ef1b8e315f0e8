//! Crate-wide error type.

use thiserror::Error;

/// A type alias for `Result<T, Error>`.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("degenerate metric: need at least {needed} points, got {got}")]
    DegenerateMetric { needed: usize, got: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("disconnected graph: vertex {0} has no path to vertex 0")]
    Disconnected(usize),

    #[error("non-planar input: {0}")]
    NonPlanar(String),

    #[error("invalid separator path: {0}")]
    InvalidSeparatorPath(String),

    #[error("invalid HST: {0}")]
    InvalidHst(String),

    #[error("unmapped point: {0} is not a point of the tree")]
    UnmappedPoint(usize),

    #[error("cover/metric mismatch: {0}")]
    CoverMismatch(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("size cap exceeded: instance would have {requested} points, cap is {cap}")]
    SizeCap { requested: usize, cap: usize },

    #[error("LLL resampling did not converge after {rounds} rounds; {witnesses} uncovered (point, level) witnesses remain, first: {sample:?}")]
    ResamplingDiverged {
        rounds: usize,
        witnesses: usize,
        /// Up to ten uncovered (point, level) pairs.
        sample: Vec<(usize, usize)>,
    },

    #[error("ramsey extraction failed after {attempts} attempts: best |Z| = {best}, required {required}")]
    RamseyExtraction {
        attempts: usize,
        best: usize,
        required: f64,
    },

    #[error("separator construction failed: {0}")]
    SeparatorFailed(String),

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
