use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid discretization: {0}")]
    InvalidDiscretization(String),

    #[error("curve is not a Jordan curve: {0}")]
    NonJordanCurve(String),

    #[error("invalid Laurent map: {0}")]
    InvalidMap(String),

    #[error("singular geometry: {0}")]
    SingularGeometry(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The single layer operator is not invertible on the full trace space,
    /// which happens when the logarithmic capacity equals one.
    #[error("single layer system is singular (capacity too close to 1); rescale the geometry")]
    CapacityOne,

    #[error("matrix is singular: {0}")]
    SingularMatrix(String),

    #[error("measurement is inconsistent: {0}")]
    InconsistentMeasurement(String),

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("invalid moments: {0}")]
    InvalidMoments(String),

    #[error("multi-index order {0} outside the supported range 1..=16")]
    OrderOutOfRange(usize),

    #[error("oracle failure: {0}")]
    OracleFailure(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed data file {path}: {reason}")]
    Format { path: String, reason: String },
}

impl Error {
    /// Configuration and input problems, as opposed to numerical failures.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::InvalidArgument(_)
                | Error::InvalidDiscretization(_)
                | Error::InvalidMap(_)
                | Error::OrderOutOfRange(_)
                | Error::Io { .. }
                | Error::Format { .. }
        )
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
