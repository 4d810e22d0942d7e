//! Value types shared by every agent.
//!
//! All types here are immutable value objects: agents take them by reference
//! and return new values instead of mutating. Scores live on a single internal
//! `[0, 1]` scale; the judge's 1–10 scale is converted at the boundary by
//! [`normalize_judge_score`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("judge score {0} is outside the 1-10 scale")]
    OutOfRange(f64),
    #[error("prompt text is empty")]
    EmptyPrompt,
    #[error("extended prompt field `{0}` is empty")]
    EmptyExtendedField(&'static str),
    #[error("invalid hyperparameter `{field}`: {reason}")]
    InvalidParam { field: String, reason: String },
    #[error("score `{field}` = {value} is outside [0, 1]")]
    ScoreOutOfRange { field: &'static str, value: f64 },
    #[error("malformed hyperparameter document: {0}")]
    Malformed(String),
}

/// Maps a judge score on the 1–10 scale onto `[0, 1]` as `(raw - 1) / 9`.
pub fn normalize_judge_score(raw: f64) -> Result<f64, DomainError> {
    if !(1.0..=10.0).contains(&raw) {
        return Err(DomainError::OutOfRange(raw));
    }
    Ok((raw - 1.0) / 9.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    Zh,
    Ja,
    Ko,
    Other,
}

impl std::str::FromStr for Language {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "en" => Ok(Language::En),
            "zh" => Ok(Language::Zh),
            "ja" => Ok(Language::Ja),
            "ko" => Ok(Language::Ko),
            "other" => Ok(Language::Other),
            other => Err(DomainError::InvalidParam {
                field: "language".into(),
                reason: format!("unknown tag `{other}`"),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserPrompt {
    pub text: String,
    pub language: Language,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word_count_hint: Option<u32>,
    #[serde(default)]
    pub style_hints: Vec<String>,
}

impl UserPrompt {
    pub fn new(text: impl Into<String>, language: Language) -> Result<Self, DomainError> {
        let prompt = UserPrompt {
            text: text.into(),
            language,
            word_count_hint: None,
            style_hints: Vec::new(),
        };
        prompt.validate()?;
        Ok(prompt)
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if self.text.trim().is_empty() {
            return Err(DomainError::EmptyPrompt);
        }
        Ok(())
    }
}

/// The pipeline agent's split output: glyph text, texture prompt and an
/// optional semantic concept for glyph deformation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtendedPrompt {
    pub glyph_prompt: String,
    pub texture_prompt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semantic_concept: Option<String>,
}

impl ExtendedPrompt {
    pub fn new(
        glyph_prompt: impl Into<String>,
        texture_prompt: impl Into<String>,
        semantic_concept: Option<String>,
    ) -> Result<Self, DomainError> {
        let ext = ExtendedPrompt {
            glyph_prompt: glyph_prompt.into(),
            texture_prompt: texture_prompt.into(),
            semantic_concept,
        };
        ext.validate()?;
        Ok(ext)
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if self.glyph_prompt.trim().is_empty() {
            return Err(DomainError::EmptyExtendedField("glyph_prompt"));
        }
        if self.texture_prompt.trim().is_empty() {
            return Err(DomainError::EmptyExtendedField("texture_prompt"));
        }
        if matches!(&self.semantic_concept, Some(s) if s.trim().is_empty()) {
            return Err(DomainError::EmptyExtendedField("semantic_concept"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StyleKind {
    Normal,
    Traditional,
    Semantic,
}

impl fmt::Display for StyleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StyleKind::Normal => "Normal",
            StyleKind::Traditional => "Traditional",
            StyleKind::Semantic => "Semantic",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for StyleKind {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "normal" => Ok(StyleKind::Normal),
            "traditional" => Ok(StyleKind::Traditional),
            "semantic" => Ok(StyleKind::Semantic),
            other => Err(DomainError::InvalidParam {
                field: "style_kind".into(),
                reason: format!("unknown style `{other}`"),
            }),
        }
    }
}

/// Control conditions a render request can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ControlKind {
    Edge,
    Depth,
    Scribble,
}

impl ControlKind {
    pub fn name(self) -> &'static str {
        match self {
            ControlKind::Edge => "edge",
            ControlKind::Depth => "depth",
            ControlKind::Scribble => "scribble",
        }
    }
}

/// Numeric feedback metrics. Preferences are free-form and not a metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "cos")]
    Consistency,
    #[serde(rename = "qua")]
    Quality,
    #[serde(rename = "gly")]
    Glyph,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Consistency, Metric::Quality, Metric::Glyph];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentKeyword {
    pub keyword: String,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineParams {
    /// Use the deterministic splitter when the chat backend cannot answer.
    pub fallback_enabled: bool,
    /// Keywords appended to the render prompt, each repeated `count` times.
    pub augment_keywords: Vec<AugmentKeyword>,
    /// Free scalar knobs.
    pub values: BTreeMap<String, f64>,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            fallback_enabled: true,
            augment_keywords: Vec::new(),
            values: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GlyphParams {
    /// Explicit style; `None` lets the style classifier decide.
    pub style_kind: Option<StyleKind>,
    pub font_id: String,
    pub deform_strength: f64,
    pub max_iterations: u32,
    pub legibility_weight: f64,
}

impl Default for GlyphParams {
    fn default() -> Self {
        GlyphParams {
            style_kind: None,
            font_id: "dejavu-sans".into(),
            deform_strength: 1.0,
            max_iterations: 40,
            legibility_weight: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TextureParams {
    /// Category path the tree walk is pinned to, root first.
    pub forced_path: Option<Vec<String>>,
    /// Stored normalized. Empty means single-model fusion.
    pub fusion_alphas: Vec<f64>,
    pub control_weights: BTreeMap<ControlKind, f64>,
    pub guidance: f64,
    /// Guidance at session start; caps guidance raises.
    pub base_guidance: f64,
    pub seed: u64,
    pub negative_prompt: String,
    /// Leaf ids from the last model selection, best first.
    pub ranking: Vec<String>,
    /// Index into `ranking` of the primary fused model.
    pub rank_offset: usize,
}

impl Default for TextureParams {
    fn default() -> Self {
        let mut control_weights = BTreeMap::new();
        control_weights.insert(ControlKind::Edge, 0.8);
        control_weights.insert(ControlKind::Depth, 0.5);
        TextureParams {
            forced_path: None,
            fusion_alphas: Vec::new(),
            control_weights,
            guidance: 7.5,
            base_guidance: 7.5,
            seed: 42,
            negative_prompt: "blurry, low quality, distorted letters".into(),
            ranking: Vec::new(),
            rank_offset: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QaParams {
    /// Iteration budget.
    pub tau: u32,
    /// Score threshold on `S = 1 - L`.
    pub theta: f64,
    pub metric_weights: BTreeMap<Metric, f64>,
}

impl Default for QaParams {
    fn default() -> Self {
        let mut metric_weights = BTreeMap::new();
        metric_weights.insert(Metric::Consistency, 0.5);
        metric_weights.insert(Metric::Quality, 0.3);
        metric_weights.insert(Metric::Glyph, 0.2);
        QaParams {
            tau: 3,
            theta: 0.85,
            metric_weights,
        }
    }
}

/// The full tunable parameter set, split by owning agent.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperParams {
    pub pipeline: PipelineParams,
    pub glyph: GlyphParams,
    pub texture: TextureParams,
    pub qa: QaParams,
}

fn invalid(field: &str, reason: impl Into<String>) -> DomainError {
    DomainError::InvalidParam {
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn check_unit(field: &str, v: f64) -> Result<(), DomainError> {
    if !(0.0..=1.0).contains(&v) {
        return Err(invalid(field, format!("{v} not in [0, 1]")));
    }
    Ok(())
}

fn check_non_negative(field: &str, v: f64) -> Result<(), DomainError> {
    if !v.is_finite() || v < 0.0 {
        return Err(invalid(field, format!("{v} is not a finite non-negative number")));
    }
    Ok(())
}

impl HyperParams {
    /// Parses a JSON document, normalizes fusion weights and validates.
    pub fn from_json(text: &str) -> Result<Self, DomainError> {
        let raw: HyperParams =
            serde_json::from_str(text).map_err(|e| DomainError::Malformed(e.to_string()))?;
        let params = raw.normalized()?;
        params.validate()?;
        Ok(params)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("hyperparameters always serialize")
    }

    /// Returns a copy with `fusion_alphas` scaled to sum to one.
    pub fn normalized(mut self) -> Result<Self, DomainError> {
        let alphas = &mut self.texture.fusion_alphas;
        if !alphas.is_empty() {
            for &a in alphas.iter() {
                check_non_negative("texture.fusion_alphas", a)?;
            }
            let sum: f64 = alphas.iter().sum();
            if sum <= 0.0 {
                return Err(invalid("texture.fusion_alphas", "all weights are zero"));
            }
            if (sum - 1.0).abs() <= 1e-12 {
                return Ok(self);
            }
            for a in alphas.iter_mut() {
                *a /= sum;
            }
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        for kw in &self.pipeline.augment_keywords {
            if kw.keyword.trim().is_empty() {
                return Err(invalid("pipeline.augment_keywords", "empty keyword"));
            }
            if kw.count == 0 {
                return Err(invalid("pipeline.augment_keywords", "zero repetition count"));
            }
        }
        for (name, v) in &self.pipeline.values {
            if !v.is_finite() {
                return Err(invalid(&format!("pipeline.values.{name}"), "not finite"));
            }
        }

        let g = &self.glyph;
        if g.font_id.trim().is_empty() {
            return Err(invalid("glyph.font_id", "empty"));
        }
        check_unit("glyph.deform_strength", g.deform_strength)?;
        if g.max_iterations == 0 {
            return Err(invalid("glyph.max_iterations", "must be positive"));
        }
        check_non_negative("glyph.legibility_weight", g.legibility_weight)?;

        let t = &self.texture;
        if let Some(path) = &t.forced_path {
            if path.is_empty() || path.iter().any(|p| p.trim().is_empty()) {
                return Err(invalid("texture.forced_path", "empty path segment"));
            }
        }
        if !t.fusion_alphas.is_empty() {
            for &a in &t.fusion_alphas {
                check_non_negative("texture.fusion_alphas", a)?;
            }
            let sum: f64 = t.fusion_alphas.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(invalid("texture.fusion_alphas", format!("sum {sum} != 1")));
            }
        }
        for (kind, &w) in &t.control_weights {
            check_unit(&format!("texture.control_weights.{}", kind.name()), w)?;
        }
        for (field, v) in [("texture.guidance", t.guidance), ("texture.base_guidance", t.base_guidance)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(invalid(field, "must be positive"));
            }
        }

        if self.qa.tau == 0 {
            return Err(invalid("qa.tau", "must be positive"));
        }
        check_unit("qa.theta", self.qa.theta)?;
        for &w in self.qa.metric_weights.values() {
            check_non_negative("qa.metric_weights", w)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Source {
    Model,
    User,
    Merged,
}

/// Metric set `G` produced by the judge and/or the user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackBundle {
    pub g_cos: f64,
    pub g_qua: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_gly: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_pref: Option<BTreeMap<String, String>>,
    pub loss: f64,
    #[serde(default)]
    pub missing_targets: Vec<String>,
    pub source: Source,
    /// The user flagged the letters as hard to read.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub glyph_complaint: bool,
    /// Metrics whose value came from the user after a merge.
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub user_fields: BTreeSet<Metric>,
}

impl FeedbackBundle {
    /// A model-sourced bundle with loss not yet computed.
    pub fn model(
        g_cos: f64,
        g_qua: f64,
        g_gly: Option<f64>,
        missing_targets: Vec<String>,
    ) -> Result<Self, DomainError> {
        let bundle = FeedbackBundle {
            g_cos,
            g_qua,
            g_gly,
            g_pref: None,
            loss: 0.0,
            missing_targets,
            source: Source::Model,
            glyph_complaint: false,
            user_fields: BTreeSet::new(),
        };
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn metric(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Consistency => Some(self.g_cos),
            Metric::Quality => Some(self.g_qua),
            Metric::Glyph => self.g_gly,
        }
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        let scores = [("g_cos", Some(self.g_cos)), ("g_qua", Some(self.g_qua)), ("g_gly", self.g_gly)];
        for (field, value) in scores {
            if let Some(v) = value {
                if !(0.0..=1.0).contains(&v) {
                    return Err(DomainError::ScoreOutOfRange { field, value: v });
                }
            }
        }
        if !self.loss.is_finite() || self.loss < 0.0 {
            return Err(invalid("loss", format!("{} is negative", self.loss)));
        }
        Ok(())
    }
}

/// Content-addressed reference to a rendered image.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArtifactRef(pub String);

impl fmt::Display for ArtifactRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One pass of the design loop. Failed passes keep `error` and no artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub index: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extended_prompt: Option<ExtendedPrompt>,
    pub params_snapshot: HyperParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub artifact_ref: Option<ArtifactRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feedback: Option<FeedbackBundle>,
    /// `1 - loss` of the merged feedback.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn judge_score_endpoints() {
        assert_eq!(normalize_judge_score(10.0).unwrap(), 1.0);
        assert_eq!(normalize_judge_score(1.0).unwrap(), 0.0);
        let seven = normalize_judge_score(7.0).unwrap();
        assert!((seven - 6.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn judge_score_out_of_range() {
        assert_eq!(normalize_judge_score(0.5), Err(DomainError::OutOfRange(0.5)));
        assert!(normalize_judge_score(10.01).is_err());
        assert!(normalize_judge_score(f64::NAN).is_err());
    }

    #[test]
    fn user_prompt_rejects_blank() {
        assert_eq!(UserPrompt::new("   ", Language::En), Err(DomainError::EmptyPrompt));
        assert!(UserPrompt::new("hello", Language::Zh).is_ok());
    }

    #[test]
    fn extended_prompt_rejects_empty_concept() {
        assert!(ExtendedPrompt::new("a", "b", Some(" ".into())).is_err());
        assert!(ExtendedPrompt::new("", "b", None).is_err());
        assert!(ExtendedPrompt::new("a", "b", Some("dove".into())).is_ok());
    }

    #[test]
    fn defaults_validate() {
        HyperParams::default().validate().unwrap();
    }

    #[test]
    fn alphas_are_normalized_on_ingestion() {
        let mut p = HyperParams::default();
        p.texture.fusion_alphas = vec![2.0, 6.0];
        let json = serde_json::to_string(&p).unwrap();
        let parsed = HyperParams::from_json(&json).unwrap();
        assert_eq!(parsed.texture.fusion_alphas, vec![0.25, 0.75]);
    }

    #[test]
    fn all_zero_alphas_rejected() {
        let mut p = HyperParams::default();
        p.texture.fusion_alphas = vec![0.0, 0.0];
        assert!(HyperParams::from_json(&p.to_json()).is_err());
    }

    #[test]
    fn out_of_range_params_rejected() {
        let mut p = HyperParams::default();
        p.glyph.deform_strength = 1.5;
        assert!(p.validate().is_err());
        let mut p = HyperParams::default();
        p.qa.theta = -0.1;
        assert!(p.validate().is_err());
        let mut p = HyperParams::default();
        p.texture.guidance = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn partial_documents_fill_defaults() {
        let p = HyperParams::from_json(r#"{"qa": {"tau": 5}}"#).unwrap();
        assert_eq!(p.qa.tau, 5);
        assert_eq!(p.qa.theta, QaParams::default().theta);
        assert_eq!(p.glyph, GlyphParams::default());
    }

    fn arb_params() -> impl Strategy<Value = HyperParams> {
        (
            any::<bool>(),
            prop::collection::vec(("[a-z]{1,8}", 1u32..4), 0..3),
            prop::option::of(prop_oneof![
                Just(StyleKind::Normal),
                Just(StyleKind::Traditional),
                Just(StyleKind::Semantic)
            ]),
            0.0f64..=1.0,
            1u32..500,
            0.0f64..100.0,
            prop::collection::vec(0.01f64..10.0, 0..4),
            (0.1f64..30.0, any::<u64>(), 1u32..10, 0.0f64..=1.0),
            prop::collection::btree_map("[a-z]{1,6}", -1e6f64..1e6, 0..3),
        )
            .prop_map(
                |(fallback, kws, style, strength, iters, lambda, alphas, (guid, seed, tau, theta), values)| {
                    let mut p = HyperParams::default();
                    p.pipeline.fallback_enabled = fallback;
                    p.pipeline.augment_keywords = kws
                        .into_iter()
                        .map(|(keyword, count)| AugmentKeyword { keyword, count })
                        .collect();
                    p.pipeline.values = values;
                    p.glyph.style_kind = style;
                    p.glyph.deform_strength = strength;
                    p.glyph.max_iterations = iters;
                    p.glyph.legibility_weight = lambda;
                    p.texture.fusion_alphas = alphas;
                    p.texture.guidance = guid;
                    p.texture.seed = seed;
                    p.qa.tau = tau;
                    p.qa.theta = theta;
                    p.normalized().unwrap()
                },
            )
    }

    proptest! {
        #[test]
        fn judge_normalization_is_monotone(a in 1.0f64..=10.0, b in 1.0f64..=10.0) {
            prop_assume!(a < b);
            prop_assert!(normalize_judge_score(a).unwrap() < normalize_judge_score(b).unwrap());
        }

        #[test]
        fn validated_params_round_trip(p in arb_params()) {
            p.validate().unwrap();
            let back = HyperParams::from_json(&p.to_json()).unwrap();
            prop_assert_eq!(back, p);
        }
    }
}
