use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("sample set contains no graphs")]
    EmptySampleSet,

    #[error("node set needs at least two distinct labels, found {0}")]
    TooFewNodes(usize),

    #[error("duplicate node label `{0}`")]
    DuplicateNode(String),

    #[error("unknown node label `{0}`")]
    UnknownNode(String),

    #[error("self-loop on node `{0}`")]
    SelfLoop(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {gap:e}")]
    Asymmetric { i: usize, j: usize, gap: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid index selection: {0}")]
    InvalidIndex(String),

    #[error("{0}")]
    Domain(String),

    #[error("gamma shape non-positive: m + 1 must exceed k (m = {m}, k = {k})")]
    GammaShape { m: usize, k: usize },

    #[error("{kind} statistic {value} outside its bounds [{lo}, {hi}]")]
    OutOfBounds {
        kind: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
