use crate::solver::StartVerdict;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("point outside the space domain: {0}")]
    Domain(String),

    #[error("inadmissible starting pair: {}", .0.details)]
    InadmissibleStart(StartVerdict),

    #[error("unknown problem `{name}`; registered problems: {}", .registry.join(", "))]
    UnknownProblem { name: String, registry: Vec<String> },

    #[error("malformed problem file {source_name} at {location}: {message}")]
    ProblemFile { source_name: String, location: String, message: String },

    #[error("sampler failed: {0}")]
    Sampler(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// True for errors caused by what the caller asked for, as opposed to
    /// failures of the environment (I/O).
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}
