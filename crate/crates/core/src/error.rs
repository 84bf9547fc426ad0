use thiserror::Error;

use crate::backends::BackendError;
use crate::wordnet::WordNetError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    WordNet(#[from] WordNetError),
}

impl PipelineError {
    pub fn invalid(message: impl Into<String>) -> Self {
        Self::InvalidArgument(message.into())
    }
}

pub type PipelineResult<T> = Result<T, PipelineError>;
