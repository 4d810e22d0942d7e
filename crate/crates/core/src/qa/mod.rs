//! Evaluation agent: target extraction, consistency and quality checks,
//! user-precedence merge, loss, update rules and the tuning loop.

pub mod assess;
pub mod loss;
pub mod merge;
pub mod questions;
pub mod rules;
pub mod targets;
pub mod tune;

use thiserror::Error;

use crate::domain::DomainError;
use crate::gateway::GatewayError;

pub use assess::{assess_consistency, assess_quality};
pub use loss::{compute_loss, loss_split};
pub use merge::{merge, UserAnswers};
pub use questions::{default_questions, session_questions, AnswerType, Question};
pub use rules::{update_params, update_params_with, RuleConfig};
pub use targets::{extract_targets, TargetList};
pub use tune::{tune, Evaluation, StopReason, TuneConfig, TuneHooks, TuneOutcome};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QaError {
    #[error("no `Targets:` marker in response: {0}")]
    ParseFailure(String),
    #[error("no yes/no verdict for `{target}`: {response}")]
    UnparseableVerdict { target: String, response: String },
    #[error("no weighted metric is present")]
    NoMetricsPresent,
    #[error("unknown directive `{0}`")]
    UnknownDirective(String),
    #[error("feedback bundle must be merged before updating parameters")]
    NotMerged,
    #[error("iteration budget tau must be at least 1")]
    InvalidTau,
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}
