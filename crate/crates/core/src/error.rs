use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A model or configuration parameter violates its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An argument lies outside the domain of the evaluated function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("rejection budget exhausted after {attempts} attempts (acceptance too small for these parameters)")]
    AttemptsExhausted { attempts: u64 },

    #[error("kernel rank deficiency at step {step}: remaining mass {mass:e} (expected {expected})")]
    RankDeficient {
        step: usize,
        mass: f64,
        expected: usize,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("contour configuration: {0}")]
    Contour(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("config: {0}")]
    Config(String),

    /// The inner error is part of the message, not the source chain, so
    /// chained reports print it once.
    #[error("stage `{stage}` failed: {cause}")]
    Stage { stage: &'static str, cause: Box<Error> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Wraps an error with the name of the pipeline stage it came from.
    pub fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            cause: Box::new(self),
        }
    }
}
