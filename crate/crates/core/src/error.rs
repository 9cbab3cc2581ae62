use thiserror::Error;

/// Everything that can go wrong between reading a matrix and rounding a count.
///
/// Complex locations are carried as `f64` pairs so the error type does not depend
/// on the scalar parameter.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("matrix is not square ({rows}x{cols})")]
    Shape { rows: usize, cols: usize },
    #[error("unsupported Matrix Market field `{0}`")]
    UnsupportedField(String),
    #[error("unsupported Matrix Market symmetry `{0}`")]
    UnsupportedSymmetry(String),
    #[error("entry ({row}, {col}) out of range for order {n}")]
    Index { row: usize, col: usize, n: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("singular matrix: zero pivot in column {column}")]
    SingularMatrix { column: usize },
    #[error("determinant ratio would overflow (exponent {exponent:.3e})")]
    RatioOverflow { exponent: f64 },
    #[error("degenerate contour: {0}")]
    DegenerateContour(String),
    #[error("contour is not symmetric with respect to the real axis")]
    Symmetry,
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("contour touches the spectrum at z = {re:e}{im:+e}i")]
    ContourTouchesSpectrum { re: f64, im: f64 },
    #[error("point {re:e}{im:+e}i lies on the contour")]
    BoundaryPoint { re: f64, im: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
