use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown node label `{0}`")]
    UnknownLabel(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("invalid subset: {0}")]
    InvalidSubset(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
        last: Vec<f64>,
    },

    #[error("leading eigenvalue {0} of the scattering block is numerically 1")]
    Singular(f64),

    #[error("left and right eigenvalue estimates disagree ({left} vs {right})")]
    Degenerate { left: f64, right: f64 },

    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("dimension {size} exceeds the dense cap {cap}")]
    CapExceeded { size: usize, cap: usize },

    #[error("singular linear system (pivot {pivot:e} in column {column})")]
    SingularSystem { column: usize, pivot: f64 },
}
