use thiserror::Error;

/// Errors raised by the verification toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian: max |M_ij - conj(M_ji)| = {max_asymmetry:e}")]
    NotHermitian { max_asymmetry: f64 },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("{what} vectors are not orthonormal (max deviation {deviation:e})")]
    NotOrthonormal { what: &'static str, deviation: f64 },

    #[error("coefficient vector belongs to {found:?} but {expected:?} was required")]
    SideMismatch {
        expected: crate::operators::Side,
        found: crate::operators::Side,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("context does not diagonalize the operator (max off-diagonal {residual:e})")]
    ContextMismatch { residual: f64 },

    #[error("operator spectrum is not of class Omega_N: {0}")]
    WrongSpectrum(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("model `{0}` does not support this operation")]
    Unsupported(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
