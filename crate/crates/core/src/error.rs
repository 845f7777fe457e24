use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown domain shape `{0}`")]
    UnknownShape(String),

    #[error("shape `{shape}` is not defined in dimension {dim}")]
    ShapeDimension { shape: String, dim: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported dimension {dim}: {reason}")]
    UnsupportedDimension { dim: usize, reason: &'static str },

    #[error("non-finite coordinate in point {index}")]
    NonFinite { index: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("grid of {per_axis}^{dim} points exceeds the 1e8 point limit")]
    GridTooLarge { dim: usize, per_axis: usize },

    #[error("negative search radius {0}")]
    NegativeRadius(f64),

    #[error("negative distance {0} passed to the kernel")]
    NegativeDistance(f64),

    #[error("points {0} and {1} coincide")]
    DuplicatePoints(usize, usize),

    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("subdomain {index}: {source}")]
    Subdomain {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("no subdomain center falls inside the domain for any grid up to {max_per_axis} points per axis; supply a custom covering")]
    ThinDomain { max_per_axis: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn in_subdomain(self, index: usize) -> Self {
        Error::Subdomain {
            index,
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command line runner: 1 for configuration
    /// problems, 2 for numeric failures, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DuplicatePoints(..) | Error::NotPositiveDefinite { .. } => 2,
            Error::Subdomain { source, .. } => source.exit_code(),
            Error::Io { .. } | Error::Csv { .. } => 3,
            _ => 1,
        }
    }
}
