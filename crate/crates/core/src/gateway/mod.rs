//! Chat-completion gateway.
//!
//! Every agent talks to language and vision models through [`Gateway`], which
//! wraps one [`ChatBackend`]. Three backends ship with the crate:
//!
//! - [`live::LiveBackend`]: OpenAI-compatible HTTP endpoint.
//! - [`replay::ReplayBackend`]: prompt-hash keyed fixture file.
//! - [`mock::MockBackend`]: rule-based responder keyed off template markers.
//!
//! Images are passed as reference strings inside the prompt text
//! (`artifact:<ref>` for rendered artifacts).

pub mod live;
pub mod mock;
pub mod parse;
pub mod replay;
pub mod templates;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parse::{parse_extension, parse_judge_triplet, parse_selected, parse_targets, parse_verdict};
pub use templates::{render_template, PromptTemplate, TemplateId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GatewayError {
    #[error("missing template binding `{0}`")]
    MissingBinding(String),
    #[error("unknown template `{0}`")]
    UnknownTemplate(String),
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("no fixture entry for prompt hash {0}")]
    FixtureMiss(String),
    #[error("request timed out after {0} ms")]
    Timeout(u64),
    #[error("invalid backend response: {0}")]
    InvalidResponse(String),
    #[error("invalid backend config: {0}")]
    InvalidConfig(String),
    #[error("fixture file: {0}")]
    Fixture(String),
    #[error("no `Selected:` marker in response")]
    MarkerNotFound,
    #[error("malformed judge scores: {0}")]
    MalformedScores(String),
}

pub trait ChatBackend: Send + Sync {
    fn id(&self) -> String;
    fn complete(&self, prompt: &str) -> Result<String, GatewayError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatExchange {
    pub prompt: String,
    pub response: String,
    pub backend_id: String,
    pub latency_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OnMiss {
    /// Use the fixture's `default` record, or fail with `FixtureMiss`.
    #[default]
    Default,
    Error,
    /// Answer with the mock backend.
    Mock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum BackendMode {
    Live {
        endpoint: String,
        #[serde(default = "default_model")]
        model: String,
        #[serde(default = "default_key_env")]
        api_key_env: String,
    },
    Replay {
        fixture_path: PathBuf,
        #[serde(default)]
        on_miss: OnMiss,
        /// Artifact directory for the mock fallback.
        #[serde(default)]
        artifact_dir: Option<PathBuf>,
    },
    Mock {
        #[serde(default)]
        artifact_dir: Option<PathBuf>,
    },
    /// Always unavailable. Forces the agents onto their fallbacks.
    Disabled,
}

fn default_model() -> String {
    "gpt-4".into()
}

fn default_key_env() -> String {
    "OPENAI_API_KEY".into()
}

fn default_timeout() -> u64 {
    30_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    #[serde(flatten)]
    pub mode: BackendMode,
    #[serde(default = "default_timeout")]
    pub timeout_ms: u64,
    #[serde(default)]
    pub max_retries: u32,
}

impl BackendConfig {
    pub fn mock(artifact_dir: Option<PathBuf>) -> Self {
        BackendConfig { mode: BackendMode::Mock { artifact_dir }, timeout_ms: default_timeout(), max_retries: 0 }
    }

    pub fn replay(fixture_path: impl Into<PathBuf>, on_miss: OnMiss) -> Self {
        BackendConfig {
            mode: BackendMode::Replay { fixture_path: fixture_path.into(), on_miss, artifact_dir: None },
            timeout_ms: default_timeout(),
            max_retries: 0,
        }
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.timeout_ms == 0 {
            return Err(GatewayError::InvalidConfig("timeout_ms must be positive".into()));
        }
        match &self.mode {
            BackendMode::Live { endpoint, .. } if endpoint.trim().is_empty() => {
                Err(GatewayError::InvalidConfig("live mode needs an endpoint".into()))
            }
            BackendMode::Replay { fixture_path, .. } if !fixture_path.is_file() => Err(GatewayError::InvalidConfig(
                format!("fixture {} does not exist", fixture_path.display()),
            )),
            _ => Ok(()),
        }
    }
}

struct DisabledBackend;

impl ChatBackend for DisabledBackend {
    fn id(&self) -> String {
        "disabled".into()
    }

    fn complete(&self, _prompt: &str) -> Result<String, GatewayError> {
        Err(GatewayError::BackendUnavailable("backend disabled".into()))
    }
}

/// Cheap to clone; backends are shared behind an `Arc`.
#[derive(Clone)]
pub struct Gateway {
    backend: Arc<dyn ChatBackend>,
}

impl std::fmt::Debug for Gateway {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Gateway").field("backend", &self.backend.id()).finish()
    }
}

impl Gateway {
    pub fn new(backend: impl ChatBackend + 'static) -> Self {
        Gateway { backend: Arc::new(backend) }
    }

    pub fn from_config(cfg: &BackendConfig) -> Result<Self, GatewayError> {
        cfg.validate()?;
        Ok(match &cfg.mode {
            BackendMode::Live { endpoint, model, api_key_env } => Gateway::new(live::LiveBackend::new(
                endpoint.clone(),
                model.clone(),
                api_key_env.clone(),
                cfg.timeout_ms,
                cfg.max_retries,
            )),
            BackendMode::Replay { fixture_path, on_miss, artifact_dir } => {
                let replay = replay::ReplayBackend::load(fixture_path, *on_miss)?;
                if *on_miss == OnMiss::Mock {
                    Gateway::new(replay.with_fallback(mock::MockBackend::new(artifact_dir.clone())))
                } else {
                    Gateway::new(replay)
                }
            }
            BackendMode::Mock { artifact_dir } => Gateway::new(mock::MockBackend::new(artifact_dir.clone())),
            BackendMode::Disabled => Gateway::disabled(),
        })
    }

    pub fn disabled() -> Self {
        Gateway::new(DisabledBackend)
    }

    pub fn backend_id(&self) -> String {
        self.backend.id()
    }

    pub fn complete(&self, prompt: &str) -> Result<ChatExchange, GatewayError> {
        let start = Instant::now();
        let response = self.backend.complete(prompt)?;
        Ok(ChatExchange {
            prompt: prompt.to_string(),
            response,
            backend_id: self.backend.id(),
            latency_ms: start.elapsed().as_millis() as u64,
        })
    }

    pub fn complete_template(
        &self,
        id: TemplateId,
        bindings: &BTreeMap<String, String>,
    ) -> Result<ChatExchange, GatewayError> {
        let prompt = render_template(id, bindings)?;
        self.complete(&prompt)
    }
}

/// Prompt-side form of an image reference.
pub fn image_ref(artifact: &str) -> String {
    format!("artifact:{artifact}")
}
