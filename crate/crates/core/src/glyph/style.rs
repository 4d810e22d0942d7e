//! Keyword-rule glyph style classifier.

use crate::domain::{ExtendedPrompt, HyperParams, StyleKind};
use crate::pipeline::extend::words;

const FORMAL: &[&str] = &[
    "wedding", "gala", "invitation", "elegant", "formal", "business", "corporate", "ceremony", "official",
    "professional", "luxury", "minimal", "minimalist", "logo", "certificate", "conference", "banquet",
];

const TRADITIONAL: &[&str] = &[
    "calligraphy", "traditional", "heritage", "ancient", "classical", "ink", "brush", "dynasty", "temple",
    "antique", "seal", "scroll", "lunar", "festival", "folk", "书法", "传统", "古风", "春节",
];

const SEMANTIC: &[&str] = &[
    "funny", "humor", "humorous", "playful", "cartoon", "creature", "dragon", "animal", "cute", "whimsical",
    "shaped", "imaginative", "monster", "fusion", "morph", "silly", "comic", "cat", "dog", "bird", "fish",
];

fn hits(ws: &[String], cues: &[&str]) -> usize {
    ws.iter().filter(|w| cues.contains(&w.as_str())).count()
}

/// Counts cue words per style; the largest count wins with ties going to
/// Semantic, then Traditional. No cue at all means Normal. An explicit
/// `glyph.style_kind` overrides the classifier.
pub fn select_style(ext: &ExtendedPrompt, params: &HyperParams) -> StyleKind {
    if let Some(explicit) = params.glyph.style_kind {
        return explicit;
    }
    let text = format!(
        "{} {} {}",
        ext.glyph_prompt,
        ext.texture_prompt,
        ext.semantic_concept.as_deref().unwrap_or("")
    );
    let ws = words(&text);
    let mut semantic = hits(&ws, SEMANTIC);
    let lower = text.to_lowercase();
    if ext.semantic_concept.is_some() || lower.contains("shape of") || lower.contains("shaped like") {
        semantic += 1;
    }
    let traditional = hits(&ws, TRADITIONAL);
    let formal = hits(&ws, FORMAL);
    if semantic > 0 && semantic >= traditional && semantic >= formal {
        StyleKind::Semantic
    } else if traditional > 0 && traditional >= formal {
        StyleKind::Traditional
    } else {
        StyleKind::Normal
    }
}
