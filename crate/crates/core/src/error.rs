use thiserror::Error;

/// Errors produced by model fitting, corridor construction and planning.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no samples")]
    NoSamples,
    #[error("invalid sample: {0}")]
    InvalidSample(String),
    #[error("singular covariance")]
    SingularCovariance,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("negative statistic")]
    NegativeStatistic,
    #[error("degenerate confidence level")]
    DegenerateConfidenceLevel,
    #[error("invalid mixture: {0}")]
    InvalidMixture(String),
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("projection nonconvergent")]
    ProjectionNonconvergent,
    #[error("empty corridor")]
    EmptyCorridor,
    #[error("singular Jacobian")]
    SingularJacobian,
    #[error("invalid endpoints")]
    InvalidEndpoints,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}
