//! Shared, read-only resources built once from the configuration.

use forge_core::artifact::ArtifactStore;
use forge_core::gateway::Gateway;
use forge_core::glyph::FontRegistry;
use forge_core::texture::{load_tree, ModelTree};

use crate::config::ServiceConfig;
use crate::error::{Result, ServiceError};
use crate::store::SessionStore;

pub struct Runtime {
    pub config: ServiceConfig,
    pub gateway: Gateway,
    pub tree: ModelTree,
    pub fonts: FontRegistry,
    pub artifacts: ArtifactStore,
    pub sessions: SessionStore,
}

impl Runtime {
    pub fn new(config: ServiceConfig) -> Result<Self> {
        config.validate()?;
        let gateway =
            Gateway::from_config(&config.effective_gateway()).map_err(|e| ServiceError::Config(e.to_string()))?;
        let tree = match &config.model_tree {
            Some(p) => load_tree(p),
            None => ModelTree::bundled(),
        }
        .map_err(|e| ServiceError::Config(format!("model tree: {e}")))?;
        let fonts = match &config.font_index {
            Some(p) => FontRegistry::load(p),
            None => FontRegistry::bundled(),
        }
        .map_err(|e| ServiceError::Config(format!("fonts: {e}")))?;
        Ok(Runtime {
            artifacts: ArtifactStore::new(config.artifact_dir()),
            sessions: SessionStore::new(config.session_dir()),
            gateway,
            tree,
            fonts,
            config,
        })
    }

    pub fn categories(&self) -> Vec<String> {
        self.tree.top_level().into_iter().map(str::to_string).collect()
    }
}
