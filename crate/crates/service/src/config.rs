//! TOML service configuration. Every default is offline: mock chat backend,
//! mock renderer, bundled fonts and model tree.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use forge_core::gateway::{BackendConfig, BackendMode};
use forge_core::glyph::RESOLUTIONS;
use forge_core::pipeline::Directive;
use forge_core::qa::RuleConfig;
use forge_core::texture::{RenderBackendConfig, SearchMode};
use forge_core::HyperParams;

use crate::error::{Result, ServiceError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    /// Default mode for new sessions.
    pub interactive: bool,
    /// Start the next iteration as soon as feedback arrives.
    pub auto_continue: bool,
    pub directive: String,
    pub search_mode: SearchMode,
    pub raster_resolution: usize,
    pub model_tree: Option<PathBuf>,
    pub font_index: Option<PathBuf>,
    pub gateway: BackendConfig,
    pub render: RenderBackendConfig,
    pub params: HyperParams,
    pub rules: RuleConfig,
    pub listen: String,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            data_dir: PathBuf::from("forge-data"),
            interactive: false,
            auto_continue: false,
            directive: Directive::Auto.as_str().into(),
            search_mode: SearchMode::Greedy,
            raster_resolution: 64,
            model_tree: None,
            font_index: None,
            gateway: BackendConfig::mock(None),
            render: RenderBackendConfig::default(),
            params: HyperParams::default(),
            rules: RuleConfig::default(),
            listen: "127.0.0.1:8080".into(),
        }
    }
}

fn rebase(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl ServiceConfig {
    /// Reads a TOML file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: ServiceConfig =
            toml::from_str(&text).map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.rebase_paths(&base);
        Ok(cfg)
    }

    pub fn rebase_paths(&mut self, base: &Path) {
        rebase(base, &mut self.data_dir);
        for p in [&mut self.model_tree, &mut self.font_index].into_iter().flatten() {
            rebase(base, p);
        }
        match &mut self.gateway.mode {
            BackendMode::Replay { fixture_path, artifact_dir, .. } => {
                rebase(base, fixture_path);
                if let Some(d) = artifact_dir {
                    rebase(base, d);
                }
            }
            BackendMode::Mock { artifact_dir: Some(d) } => rebase(base, d),
            _ => {}
        }
    }

    pub fn artifact_dir(&self) -> PathBuf {
        self.data_dir.join("artifacts")
    }

    pub fn session_dir(&self) -> PathBuf {
        self.data_dir.join("sessions")
    }

    /// Gateway config with the mock backend pointed at the artifact store.
    pub fn effective_gateway(&self) -> BackendConfig {
        let mut g = self.gateway.clone();
        match &mut g.mode {
            BackendMode::Mock { artifact_dir } | BackendMode::Replay { artifact_dir, .. } if artifact_dir.is_none() => {
                *artifact_dir = Some(self.artifact_dir());
            }
            _ => {}
        }
        g
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate().map_err(|e| ServiceError::Config(format!("params: {e}")))?;
        self.effective_gateway().validate().map_err(|e| ServiceError::Config(format!("gateway: {e}")))?;
        self.directive
            .parse::<Directive>()
            .map_err(|_| ServiceError::Config(format!("unknown directive `{}`", self.directive)))?;
        if !RESOLUTIONS.contains(&self.raster_resolution) {
            return Err(ServiceError::Config(format!(
                "raster_resolution must be one of {RESOLUTIONS:?}, got {}",
                self.raster_resolution
            )));
        }
        if let RenderBackendConfig::Live { endpoint, .. } = &self.render {
            if endpoint.trim().is_empty() {
                return Err(ServiceError::Config("render: live mode needs an endpoint".into()));
            }
        }
        Ok(())
    }
}
