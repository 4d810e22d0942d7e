//! LoRA fusion specs. Blending itself happens in the renderer.

use serde::{Deserialize, Serialize};

use super::tree::LoraModel;
use super::TextureError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionEntry {
    pub model_id: String,
    pub alpha: f64,
    pub trigger_words: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FusionSpec {
    pub entries: Vec<FusionEntry>,
}

impl FusionSpec {
    pub fn alpha_sum(&self) -> f64 {
        self.entries.iter().map(|e| e.alpha).sum()
    }

    pub fn trigger_words(&self) -> Vec<&str> {
        self.entries.iter().flat_map(|e| e.trigger_words.iter().map(String::as_str)).collect()
    }
}

/// Pairs each model with `alpha / sum(alphas)`, keeping input order.
pub fn fuse_weights(models: &[LoraModel], alphas: &[f64]) -> Result<FusionSpec, TextureError> {
    if models.len() != alphas.len() || models.is_empty() {
        return Err(TextureError::LengthMismatch { models: models.len(), alphas: alphas.len() });
    }
    if let Some(&bad) = alphas.iter().find(|a| !a.is_finite() || **a < 0.0) {
        return Err(TextureError::InvalidAlpha(bad));
    }
    let sum: f64 = alphas.iter().sum();
    if sum == 0.0 {
        return Err(TextureError::AllZeroAlphas);
    }
    let entries = models
        .iter()
        .zip(alphas)
        .map(|(m, &a)| FusionEntry {
            model_id: m.id.clone(),
            alpha: if models.len() == 1 { 1.0 } else { a / sum },
            trigger_words: m.trigger_words.clone(),
        })
        .collect();
    Ok(FusionSpec { entries })
}
