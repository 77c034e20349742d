use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid model space: {0}")]
    InvalidModelSpace(String),

    #[error("design matrix is rank deficient (term {term})")]
    RankDeficient { term: usize },

    #[error("error variance is numerically zero (sigma2 = {sigma2:e})")]
    DegenerateVariance { sigma2: f64 },

    #[error("not enough observations: n = {n}, need more than {needed}")]
    InsufficientData { n: usize, needed: usize },

    #[error("log-likelihood is not finite for model `{0}`")]
    NonFiniteLikelihood(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("too many rejected bootstrap replicates: {rejected} rejected for {accepted} accepted (max fraction {max_fraction})")]
    TooManyRejections {
        rejected: usize,
        accepted: usize,
        max_fraction: f64,
    },

    #[error("bootstrap sample has no spread (all values equal {location})")]
    DegenerateSample { location: f64 },

    #[error("quantile level {0} is outside (0, 1)")]
    QOutOfRange(f64),

    #[error("interval lower bound {lower} exceeds upper bound {upper}")]
    InvalidInterval { lower: f64, upper: f64 },

    #[error("models are equidistant from the generating process; no true sign")]
    EquidistantModels,

    #[error("zero marked recaptures; the Lincoln-Petersen estimate is infinite")]
    ZeroRecaptures,

    #[error("insufficient sample: {have} finite values, need at least {need}")]
    InsufficientSample { have: usize, need: usize },

    #[error("optimizer failed: {0}")]
    OptimizerFailure(String),

    #[error("csv error: {0}")]
    Csv(String),
}

impl Error {
    /// Errors that reject a single bootstrap replicate rather than the run.
    pub fn is_replicate_failure(&self) -> bool {
        matches!(
            self,
            Error::RankDeficient { .. }
                | Error::DegenerateVariance { .. }
                | Error::NonFiniteLikelihood(_)
        )
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Csv(err.to_string())
    }
}
