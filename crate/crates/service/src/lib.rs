//! Session orchestration for forge: configuration, the visual-program
//! interpreter, append-only session logs, the HTTP API and the CLI.

pub mod api;
pub mod config;
pub mod error;
pub mod interpreter;
pub mod runtime;
pub mod session;
pub mod store;

pub use config::ServiceConfig;
pub use error::{Result, ServiceError};
pub use runtime::Runtime;
pub use session::{NewSession, Orchestrator, Session, Status};
