use thiserror::Error;

/// Errors raised by model construction, path geometry and the verification engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidModel(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite value at step {step}: {value}")]
    NonFinite { step: usize, value: f64 },

    #[error("{family} does not provide a marginal CDF{detail}")]
    UnsupportedCdf { family: String, detail: String },

    #[error("long-run slope undefined for {0}")]
    LongRunSlopeUndefined(String),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("time {0} is not aligned to the path grid")]
    Alignment(f64),

    #[error("time {0} coincides with a vertex of the minorant")]
    VertexCollision(f64),

    #[error("duplicate slope {0} among face points")]
    SlopeTie(f64),

    #[error("not enough samples: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by bad caller input rather than numerics at run time.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidModel(_)
                | Error::Domain(_)
                | Error::LongRunSlopeUndefined(_)
                | Error::InvalidPath(_)
                | Error::Alignment(_)
                | Error::Unsupported(_)
                | Error::UnsupportedCdf { .. }
                | Error::Parse(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
