//! Hyperparameter update rules.
//!
//! - R1: each missing target becomes a pipeline augment keyword; repeats
//!   raise its count up to `repetition_cap`.
//! - R2: low quality moves fusion to the next-ranked model and raises
//!   guidance by `guidance_step`, capped at `guidance_cap` times the base.
//! - R3: low legibility (or a user complaint) halves deform strength; a
//!   semantic style with very low legibility falls back to normal.
//! - R4: preference entries naming a top-level model category pin the
//!   tree walk to that category.

use serde::{Deserialize, Serialize};

use super::QaError;
use crate::domain::{AugmentKeyword, FeedbackBundle, HyperParams, Source, StyleKind};
use crate::pipeline::Directive;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RuleConfig {
    pub repetition_cap: u32,
    pub quality_threshold: f64,
    pub guidance_step: f64,
    pub guidance_cap: f64,
    pub glyph_threshold: f64,
    pub semantic_fallback_threshold: f64,
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig {
            repetition_cap: 3,
            quality_threshold: 0.5,
            guidance_step: 0.1,
            guidance_cap: 2.0,
            glyph_threshold: 0.5,
            semantic_fallback_threshold: 0.25,
        }
    }
}

fn r1(g: &FeedbackBundle, out: &mut HyperParams, rules: &RuleConfig) {
    for target in g.missing_targets.iter().map(|t| t.trim()).filter(|t| !t.is_empty()) {
        let kws = &mut out.pipeline.augment_keywords;
        match kws.iter_mut().find(|k| k.keyword.eq_ignore_ascii_case(target)) {
            Some(k) => k.count = (k.count + 1).min(rules.repetition_cap.max(1)),
            None => kws.push(AugmentKeyword { keyword: target.to_string(), count: 1 }),
        }
    }
}

fn r2(g: &FeedbackBundle, out: &mut HyperParams, rules: &RuleConfig) {
    if g.g_qua >= rules.quality_threshold {
        return;
    }
    let t = &mut out.texture;
    if t.rank_offset + 1 < t.ranking.len() {
        t.rank_offset += 1;
    }
    t.guidance = (t.guidance * (1.0 + rules.guidance_step)).min(rules.guidance_cap * t.base_guidance);
}

fn r3(g: &FeedbackBundle, out: &mut HyperParams, rules: &RuleConfig) {
    let low = g.g_gly.is_some_and(|v| v < rules.glyph_threshold);
    if !(low || g.glyph_complaint) {
        return;
    }
    out.glyph.deform_strength /= 2.0;
    if out.glyph.style_kind == Some(StyleKind::Semantic) && g.g_gly.is_some_and(|v| v < rules.semantic_fallback_threshold) {
        out.glyph.style_kind = Some(StyleKind::Normal);
    }
}

fn truthy(v: &str) -> bool {
    !matches!(v.trim().to_ascii_lowercase().as_str(), "no" | "false" | "0" | "off")
}

fn r4(g: &FeedbackBundle, out: &mut HyperParams, categories: &[String]) {
    let Some(pref) = &g.g_pref else { return };
    let find = |s: &str| categories.iter().find(|c| c.eq_ignore_ascii_case(s.trim()));
    let by_key = pref.iter().find_map(|(k, v)| find(k).filter(|_| truthy(v)));
    let by_value = || pref.values().find_map(|v| find(v));
    if let Some(name) = by_key.or_else(by_value) {
        out.texture.forced_path = Some(vec![name.clone()]);
    }
}

/// Applies the rules allowed by `directive` to a copy of `params`.
/// `categories` are the model tree's top-level names.
pub fn update_params_with(
    g: &FeedbackBundle,
    params: &HyperParams,
    directive: &str,
    rules: &RuleConfig,
    categories: &[String],
) -> Result<HyperParams, QaError> {
    let d: Directive = directive.parse().map_err(|_| QaError::UnknownDirective(directive.to_string()))?;
    if g.source != Source::Merged {
        return Err(QaError::NotMerged);
    }
    let mut out = params.clone();
    match d {
        Directive::FallbackOn => out.pipeline.fallback_enabled = true,
        Directive::FallbackOff => out.pipeline.fallback_enabled = false,
        _ => {}
    }
    if d.augments() {
        r1(g, &mut out, rules);
    }
    if d.touches_texture() {
        r2(g, &mut out, rules);
    }
    if d.touches_glyph() {
        r3(g, &mut out, rules);
    }
    if d.touches_texture() {
        r4(g, &mut out, categories);
    }
    Ok(out)
}

pub fn update_params(
    g: &FeedbackBundle,
    params: &HyperParams,
    directive: &str,
    categories: &[String],
) -> Result<HyperParams, QaError> {
    update_params_with(g, params, directive, &RuleConfig::default(), categories)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qa::merge::{merge, UserAnswers};
    use proptest::prelude::*;

    fn merged(cos: f64, qua: f64, gly: Option<f64>, missing: &[&str]) -> FeedbackBundle {
        let gm = FeedbackBundle::model(cos, qua, gly, missing.iter().map(|s| s.to_string()).collect()).unwrap();
        merge(&gm, None)
    }

    fn cats() -> Vec<String> {
        ["General", "Cartoon", "SCI-FI"].map(String::from).to_vec()
    }

    #[test]
    fn missing_target_becomes_keyword() {
        let p = update_params(&merged(0.75, 1.0, None, &["little girl"]), &HyperParams::default(), "auto", &cats()).unwrap();
        assert_eq!(p.pipeline.augment_keywords, vec![AugmentKeyword { keyword: "little girl".into(), count: 1 }]);
    }

    #[test]
    fn perfect_feedback_is_noop() {
        let p = HyperParams::default();
        assert_eq!(update_params(&merged(1.0, 1.0, Some(1.0), &[]), &p, "auto", &cats()).unwrap(), p);
    }

    #[test]
    fn repetition_saturates() {
        let g = merged(0.5, 1.0, None, &["dove"]);
        let mut p = HyperParams::default();
        let mut counts = vec![];
        for _ in 0..4 {
            p = update_params(&g, &p, "auto", &cats()).unwrap();
            counts.push(p.pipeline.augment_keywords[0].count);
        }
        assert_eq!(counts, vec![1, 2, 3, 3]);
    }

    #[test]
    fn low_quality_moves_down_the_ranking() {
        let mut p = HyperParams::default();
        p.texture.ranking = vec!["a".into(), "b".into()];
        let g = merged(1.0, 0.2, None, &[]);
        let mut guid = vec![];
        for _ in 0..10 {
            p = update_params(&g, &p, "auto", &cats()).unwrap();
            guid.push(p.texture.guidance);
        }
        assert_eq!(p.texture.rank_offset, 1);
        assert!((guid[0] - 7.5 * 1.1).abs() < 1e-12);
        assert_eq!(*guid.last().unwrap(), 15.0);
    }

    #[test]
    fn glyph_rules() {
        let mut p = HyperParams::default();
        p.glyph.style_kind = Some(StyleKind::Semantic);
        let out = update_params(&merged(1.0, 1.0, Some(0.4), &[]), &p, "auto", &cats()).unwrap();
        assert_eq!(out.glyph.deform_strength, p.glyph.deform_strength / 2.0);
        assert_eq!(out.glyph.style_kind, Some(StyleKind::Semantic));
        let out = update_params(&merged(1.0, 1.0, Some(0.1), &[]), &p, "auto", &cats()).unwrap();
        assert_eq!(out.glyph.style_kind, Some(StyleKind::Normal));
        let complaint = merge(
            &FeedbackBundle::model(1.0, 1.0, None, vec![]).unwrap(),
            Some(&UserAnswers { glyph_complaint: true, ..Default::default() }),
        );
        let out = update_params(&complaint, &p, "auto", &cats()).unwrap();
        assert_eq!(out.glyph.deform_strength, p.glyph.deform_strength / 2.0);
    }

    #[test]
    fn preference_pins_category() {
        let mut g = merged(1.0, 1.0, None, &[]);
        g.g_pref = Some([("style".to_string(), "cartoon".to_string())].into());
        let out = update_params(&g, &HyperParams::default(), "auto", &cats()).unwrap();
        assert_eq!(out.texture.forced_path, Some(vec!["Cartoon".to_string()]));
        g.g_pref = Some([("sci-fi".to_string(), "yes".to_string())].into());
        let out = update_params(&g, &HyperParams::default(), "texture", &cats()).unwrap();
        assert_eq!(out.texture.forced_path, Some(vec!["SCI-FI".to_string()]));
        let out = update_params(&g, &HyperParams::default(), "glyph", &cats()).unwrap();
        assert_eq!(out.texture.forced_path, None);
    }

    #[test]
    fn directive_scoping_and_errors() {
        let g = merged(0.5, 0.2, Some(0.2), &["sun"]);
        let p = HyperParams::default();
        let only_aug = update_params(&g, &p, "augment", &cats()).unwrap();
        assert_eq!(only_aug.texture, p.texture);
        assert_eq!(only_aug.glyph, p.glyph);
        assert_eq!(update_params(&g, &p, "none", &cats()).unwrap(), p);
        assert!(!update_params(&g, &p, "fallback-off", &cats()).unwrap().pipeline.fallback_enabled);
        assert_eq!(update_params(&g, &p, "sideways", &cats()), Err(QaError::UnknownDirective("sideways".into())));
        let raw = FeedbackBundle::model(1.0, 1.0, None, vec![]).unwrap();
        assert_eq!(update_params(&raw, &p, "auto", &cats()), Err(QaError::NotMerged));
    }

    proptest! {
        #[test]
        fn pure(cos in 0.0f64..=1.0, qua in 0.0f64..=1.0, gly in proptest::option::of(0.0f64..=1.0)) {
            let g = merged(cos, qua, gly, &["cake"]);
            let p = HyperParams::default();
            let before = p.clone();
            let a = update_params(&g, &p, "auto", &cats()).unwrap();
            prop_assert_eq!(&p, &before);
            prop_assert_eq!(a, update_params(&g, &p, "auto", &cats()).unwrap());
        }
    }
}
