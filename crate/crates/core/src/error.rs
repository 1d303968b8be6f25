use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} vertices, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("graph sample is empty")]
    EmptySample,

    #[error("need at least {needed} graphs, found {found}")]
    InsufficientSample { needed: usize, found: usize },

    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),

    #[error("invalid vertex pair ({i}, {j}) for {v} vertices")]
    InvalidPair { i: usize, j: usize, v: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("exhaustive enumeration refused for v = {v} (maximum {max})")]
    EnumerationRefused { v: usize, max: usize },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("correlation undefined for a constant sequence")]
    UndefinedCorrelation,

    #[error("series too short: need {needed} values, found {found}")]
    SeriesTooShort { needed: usize, found: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}
