use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GhxError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported dimension {0} (supported: 1..={max})", max = crate::herm::MAX_DIM)]
    UnsupportedDimension(usize),

    #[error("metric is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("metric is ill-conditioned (eigenvalue ratio {ratio:e} exceeds {limit:e})")]
    IllConditioned { ratio: f64, limit: f64 },

    #[error("matrix is not Hermitian (asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("degree {degree} out of range 1..={n}")]
    DegreeOutOfRange { degree: usize, n: usize },

    #[error("expected {expected} arguments, found {found}")]
    ArgumentCount { expected: usize, found: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("argument {index} is outside the cone Gamma_{m}: sigma_{degree} margin {margin:e}")]
    OutsideCone {
        index: usize,
        m: usize,
        degree: usize,
        margin: f64,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("argument {index} is not primitive (functional value {residual:e})")]
    NotPrimitive { index: usize, residual: f64 },

    #[error("field is not band-limited: spectral mass {mass:e} at or above frequency {cutoff}")]
    Aliasing { cutoff: usize, mass: f64 },

    #[error("right-hand side has nonzero mean {mean:e}")]
    NonZeroMean { mean: f64 },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for GhxError {
    fn from(e: std::io::Error) -> Self {
        GhxError::Io(e.to_string())
    }
}

pub type Result<T, E = GhxError> = std::result::Result<T, E>;
