use thiserror::Error;

/// Errors produced by the simulator core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{what} ceiling exceeded: n = {n}, maximum is {max}")]
    CeilingExceeded { what: &'static str, n: usize, max: usize },

    #[error("non-finite value encountered {context}")]
    NonFinite { context: String },

    #[error("invalid pulse sequence: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidSequence(Vec<crate::system::Violation>),

    #[error("event {index}: {source}")]
    Event {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("non-uniform sampling grid at sample {index}")]
    NonUniformGrid { index: usize },

    #[error("spectrum grids differ")]
    GridMismatch,

    #[error("observable {0} was not recorded in the trajectory")]
    NotRecorded(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True when the error stems from malformed input rather than numerics.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::NonFinite { .. } => false,
            Error::Event { source, .. } => source.is_input_error(),
            _ => true,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
