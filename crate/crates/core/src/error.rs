use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown aspect `{0}`")]
    UnknownAspect(String),

    #[error("aspects {0:?} do not share a task kind")]
    MixedTasks(Vec<String>),

    #[error("invalid aspect registry: {0}")]
    InvalidRegistry(String),

    #[error("no template for ({task}, {aspect}, {direction})")]
    MissingTemplate {
        task: String,
        aspect: String,
        direction: String,
    },

    #[error("invalid template: {0}")]
    InvalidTemplate(String),

    #[error("missing value for placeholder {{{0}}}")]
    MissingPlaceholder(String),

    #[error("demonstration {index} does not bind placeholder {{{placeholder}}}")]
    DemoNotCovering { index: usize, placeholder: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid data: {0}")]
    Invalid(String),

    #[error("{what} {value} out of range (expected {expected})")]
    OutOfRange {
        what: &'static str,
        value: usize,
        expected: String,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("transport error after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },

    #[error("endpoint returned no logprobs: {0}")]
    NoLogprobs(String),

    #[error("token at byte {offset} straddles the prefix/target boundary at byte {boundary}")]
    Straddle { offset: usize, boundary: usize },

    #[error("target span resolved to zero tokens (boundary at byte {boundary})")]
    EmptyTarget { boundary: usize },

    #[error("non-finite logprob for token {token:?}")]
    NonFinite { token: String },

    #[error("scoring stopped after {completed} of {total} outputs: {source}")]
    Partial {
        completed: usize,
        total: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("unmatched score records: {0:?}")]
    Unmatched(Vec<String>),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Process exit codes for the command-line tool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    Usage = 2,
    Data = 3,
    Backend = 4,
}

impl Error {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Error::Usage(_) | Error::OutOfRange { .. } => ExitCode::Usage,
            Error::Transport { .. }
            | Error::NoLogprobs(_)
            | Error::Straddle { .. }
            | Error::EmptyTarget { .. }
            | Error::NonFinite { .. } => ExitCode::Backend,
            Error::Partial { source, .. } => source.exit_code(),
            _ => ExitCode::Data,
        }
    }
}
