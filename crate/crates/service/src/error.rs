use thiserror::Error;

use forge_core::pipeline::Violation;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("session {0} not found")]
    NotFound(String),
    #[error("artifact {0} not found")]
    ArtifactNotFound(String),
    #[error("cannot {op} while session is {status}")]
    WrongState { op: &'static str, status: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid program: {0:?}")]
    InvalidProgram(Vec<Violation>),
    #[error("storage unavailable: {0}")]
    StorageUnavailable(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0} already exists")]
    AlreadyExists(String),
    #[error("{0}")]
    Internal(String),
}

impl From<std::io::Error> for ServiceError {
    fn from(e: std::io::Error) -> Self {
        ServiceError::StorageUnavailable(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, ServiceError>;
