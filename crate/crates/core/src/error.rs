use thiserror::Error;

/// Errors produced by the discretization, solver and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside the knot range.
    #[error("parameter {value} outside knot range [{lo}, {hi}]")]
    Domain { value: f64, lo: f64, hi: f64 },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid knot vector: {0}")]
    KnotVector(String),

    /// Nonpositive Jacobian determinant of a geometry map.
    #[error("geometry map degenerate at ({xi}, {eta}) in patch {patch}: det J = {det}")]
    Geometry {
        patch: usize,
        xi: f64,
        eta: f64,
        det: f64,
    },

    #[error("assembly failed: {0}")]
    Assembly(String),

    #[error("row {row} has nonpositive lumped mass {value}")]
    Lumping { row: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("zero diagonal entry in row {row}")]
    ZeroDiagonal { row: usize },

    /// Zero or dropped pivot during incomplete factorization (row in permuted order).
    #[error("zero pivot in row {row} of the incomplete factorization")]
    ZeroPivot { row: usize },

    #[error("level {level}: {source}")]
    Level {
        level: String,
        #[source]
        source: Box<Error>,
    },

    #[error("analysis failed: {0}")]
    Analysis(String),

    #[error("matrix market: {0}")]
    MatrixMarket(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub(crate) fn at_level(self, level: impl Into<String>) -> Self {
        Error::Level {
            level: level.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
