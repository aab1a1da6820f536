use thiserror::Error;

/// Errors produced by the library.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("group index must satisfy n >= 3, got {0}")]
    InvalidIndex(i64),

    #[error("singular matrix (det = {0})")]
    SingularMatrix(f64),

    #[error("point {x} outside the interval [{lo}, {hi}]")]
    OutsideInterval { x: f64, lo: f64, hi: f64 },

    #[error("digit undefined at or too close to a pole (x = {0})")]
    SingularPoint(f64),

    #[error("orbit truncated after {0} steps")]
    OrbitTruncated(usize),

    #[error("structurally invalid word: {0}")]
    InvalidWord(String),

    #[error("candidate ({k}, {v}) rejected: {reason}")]
    InvalidCandidate { k: i64, v: String, reason: String },

    #[error("unsupported case: {0}")]
    UnsupportedCase(String),

    #[error("domain construction failed: {0}")]
    Construction(String),

    #[error("alpha {alpha} outside the closure of the requested interval")]
    AlphaOutOfRange { alpha: f64 },

    #[error("pole encountered in planar map (denominator {0:e})")]
    Pole(f64),

    #[error("density pole inside rectangle; mass is infinite")]
    InfiniteMass,

    #[error("quadrature did not converge (error estimate {0:e})")]
    QuadratureNonConvergence(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("inconclusive after {0} refinement steps")]
    Inconclusive(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
