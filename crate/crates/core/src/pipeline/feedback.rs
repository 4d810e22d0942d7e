//! Pipeline-scoped feedback integration.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{AugmentKeyword, FeedbackBundle, HyperParams, Source};

use super::PipelineError;

/// Update directive. `Auto` applies every rule; the scoped forms restrict
/// updates to one agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Directive {
    Auto,
    Augment,
    Texture,
    Glyph,
    FallbackOn,
    FallbackOff,
    None,
}

impl Directive {
    pub const ALL: [Directive; 7] = [
        Directive::Auto,
        Directive::Augment,
        Directive::Texture,
        Directive::Glyph,
        Directive::FallbackOn,
        Directive::FallbackOff,
        Directive::None,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Directive::Auto => "auto",
            Directive::Augment => "augment",
            Directive::Texture => "texture",
            Directive::Glyph => "glyph",
            Directive::FallbackOn => "fallback-on",
            Directive::FallbackOff => "fallback-off",
            Directive::None => "none",
        }
    }

    pub fn augments(self) -> bool {
        matches!(self, Directive::Auto | Directive::Augment)
    }

    pub fn touches_texture(self) -> bool {
        matches!(self, Directive::Auto | Directive::Texture)
    }

    pub fn touches_glyph(self) -> bool {
        matches!(self, Directive::Auto | Directive::Glyph)
    }
}

impl fmt::Display for Directive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Directive {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        Directive::ALL
            .into_iter()
            .find(|d| d.as_str().eq_ignore_ascii_case(t))
            .ok_or_else(|| PipelineError::UnknownDirective(s.to_string()))
    }
}

/// Applies the pipeline-owned updates: missing targets become augment
/// keywords (count at least 1, never raised here) and the fallback toggles.
/// Glyph and texture parameters are never touched.
pub fn integrate_feedback(
    g: &FeedbackBundle,
    directive: &str,
    params: &HyperParams,
) -> Result<HyperParams, PipelineError> {
    let directive: Directive = directive.parse()?;
    if g.source != Source::Merged {
        return Err(PipelineError::NotMerged);
    }
    let mut out = params.clone();
    match directive {
        Directive::FallbackOn => out.pipeline.fallback_enabled = true,
        Directive::FallbackOff => out.pipeline.fallback_enabled = false,
        d if d.augments() => {
            for target in g.missing_targets.iter().map(|t| t.trim()).filter(|t| !t.is_empty()) {
                let known = out.pipeline.augment_keywords.iter().any(|k| k.keyword.eq_ignore_ascii_case(target));
                if !known {
                    out.pipeline.augment_keywords.push(AugmentKeyword { keyword: target.to_string(), count: 1 });
                }
            }
        }
        _ => {}
    }
    Ok(out)
}
