use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed matrix: {0}")]
    MalformedMatrix(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("closed-form cokernel expects a 2x2 matrix, got {rows}x{cols}")]
    NotTwoByTwo { rows: usize, cols: usize },

    #[error("closed-form cokernel is undefined for a singular matrix")]
    Singular,

    #[error("invalid invariant factors: {0}")]
    InvalidFactors(String),

    #[error("slope not reduced: {0}/{1}")]
    SlopeNotReduced(i64, i64),

    #[error("0/0 is not a slope")]
    ZeroSlope,

    #[error("malformed slope {0:?}: expected n/n'")]
    MalformedSlope(String),

    #[error("invalid surgery parameters: {0}")]
    InvalidParams(String),

    #[error("premise not met: {0}")]
    Premise(String),

    #[error("inconsistent decision context: {0}")]
    InconsistentContext(String),

    #[error("malformed parameter box: {0}")]
    MalformedBox(String),
}

pub type Result<T> = std::result::Result<T, Error>;
