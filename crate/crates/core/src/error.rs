use std::fmt;

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A metric axiom violated by a user-supplied distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricViolation {
    Empty,
    NotSquare {
        row: usize,
        len: usize,
        expected: usize,
    },
    NotFinite {
        i: usize,
        j: usize,
    },
    NonzeroDiagonal {
        i: usize,
        value: f64,
    },
    Negative {
        i: usize,
        j: usize,
        value: f64,
    },
    ZeroOffDiagonal {
        i: usize,
        j: usize,
    },
    Asymmetric {
        i: usize,
        j: usize,
    },
    /// `d(x, z) > d(x, y) + d(y, z)` with `y` the intermediate point.
    Triangle {
        x: usize,
        y: usize,
        z: usize,
        excess: f64,
    },
    BasepointOutOfRange {
        basepoint: usize,
        len: usize,
    },
}

impl fmt::Display for MetricViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Empty => write!(f, "distance matrix is empty"),
            Self::NotSquare { row, len, expected } => {
                write!(f, "row {row} has {len} entries, expected {expected}")
            }
            Self::NotFinite { i, j } => write!(f, "entry ({i},{j}) is not finite"),
            Self::NonzeroDiagonal { i, value } => write!(f, "d({i},{i}) = {value} != 0"),
            Self::Negative { i, j, value } => write!(f, "d({i},{j}) = {value} is negative"),
            Self::ZeroOffDiagonal { i, j } => write!(f, "d({i},{j}) = 0 for distinct points"),
            Self::Asymmetric { i, j } => write!(f, "d({i},{j}) != d({j},{i})"),
            Self::Triangle { x, y, z, excess } => write!(
                f,
                "triangle inequality fails for ({x},{y},{z}): d({x},{z}) exceeds d({x},{y})+d({y},{z}) by {excess}"
            ),
            Self::BasepointOutOfRange { basepoint, len } => {
                write!(f, "basepoint {basepoint} outside 0..{len}")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid metric: {0}")]
    Metric(MetricViolation),
    #[error("vectors, maps or functionals live over different spaces")]
    SpaceMismatch,
    #[error("alpha prefix exhausted: index {index} requested, prefix holds 1..={len}")]
    PrefixExhausted { index: usize, len: usize },
    #[error("min-cost flow did not converge after {iterations} augmentations (unshipped mass {residual:e})")]
    FlowNonConvergence { residual: f64, iterations: usize },
    #[error("coordinate overflow: {0}")]
    Overflow(String),
    #[error("backend {backend} cannot be used on a {space} space")]
    Backend { backend: &'static str, space: &'static str },
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("construction constraint violated at m={m}: {detail}")]
    Constraint { m: usize, detail: String },
    #[error("{path}: {source}")]
    Parse { path: String, source: serde_json::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<MetricViolation> for Error {
    fn from(v: MetricViolation) -> Self {
        Error::Metric(v)
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
