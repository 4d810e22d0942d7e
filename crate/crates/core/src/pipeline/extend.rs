//! Prompt extension with a deterministic fallback splitter.

use crate::domain::{ExtendedPrompt, HyperParams, UserPrompt};
use crate::gateway::templates::{bind, render_template, TemplateId};
use crate::gateway::{parse_extension, Gateway};

use super::PipelineError;

const STOPWORDS: &[&str] = &[
    "a", "an", "and", "as", "at", "by", "for", "from", "in", "into", "is", "it", "its", "of", "on", "or", "the",
    "to", "with",
];

/// Lowercased alphanumeric runs of `text`.
pub fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// [`words`] without a small set of English function words.
pub fn content_words(text: &str) -> Vec<String> {
    words(text).into_iter().filter(|w| !STOPWORDS.contains(&w.as_str())).collect()
}

fn closing(open: char) -> Option<char> {
    match open {
        '"' => Some('"'),
        '\'' => Some('\''),
        '\u{2018}' => Some('\u{2019}'),
        '\u{201C}' => Some('\u{201D}'),
        _ => None,
    }
}

/// First non-empty quoted span. A straight single quote only opens after a
/// non-alphanumeric character and only closes before one, so apostrophes in
/// words like "it's" are skipped.
pub fn quoted_span(text: &str) -> Option<&str> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    'open: while i < chars.len() {
        let (pos, c) = chars[i];
        i += 1;
        let Some(close) = closing(c) else { continue };
        if c == '\'' && i > 1 && chars[i - 2].1.is_alphanumeric() {
            continue;
        }
        let start = pos + c.len_utf8();
        let mut j = i;
        while j < chars.len() {
            let (end, d) = chars[j];
            j += 1;
            if d != close || (d == '\'' && chars.get(j).is_some_and(|n| n.1.is_alphanumeric())) {
                continue;
            }
            let inner = text[start..end].trim();
            if !inner.is_empty() {
                return Some(inner);
            }
            i = j;
            continue 'open;
        }
    }
    None
}

/// `(s_gly, s_tex)`: the quoted target text (or the whole prompt) and the whole prompt.
pub fn fallback_split(text: &str) -> (String, String) {
    let full = text.trim().to_string();
    let glyph = quoted_span(text).map(str::to_string).unwrap_or_else(|| full.clone());
    (glyph, full)
}

fn language_tag(user: &UserPrompt) -> String {
    serde_json::to_value(user.language)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_else(|| "other".into())
}

/// The rendered prompt-extension request for `user`.
pub fn extend_request(user: &UserPrompt) -> Result<String, PipelineError> {
    let hints = if user.style_hints.is_empty() { "none".to_string() } else { user.style_hints.join(", ") };
    let lang = language_tag(user);
    let bindings = bind([("language", lang.as_str()), ("style_hints", hints.as_str()), ("input", user.text.trim())]);
    render_template(TemplateId::PromptExtend, &bindings).map_err(|e| PipelineError::BackendUnavailable(e.to_string()))
}

/// Splits the user prompt into glyph text, texture prompt and an optional
/// semantic concept, asking the chat backend first.
pub fn extend_prompt(
    user: &UserPrompt,
    params: &HyperParams,
    gateway: &Gateway,
) -> Result<ExtendedPrompt, PipelineError> {
    user.validate()?;
    let failure = match gateway.complete(&extend_request(user)?) {
        Ok(ex) => match parse_extension(&ex.response) {
            Some((glyph, texture, semantic)) => return Ok(ExtendedPrompt::new(glyph, texture, semantic)?),
            None => format!("unparseable extension from {}", ex.backend_id),
        },
        Err(e) => e.to_string(),
    };
    if !params.pipeline.fallback_enabled {
        return Err(PipelineError::BackendUnavailable(failure));
    }
    let (glyph, texture) = fallback_split(&user.text);
    Ok(ExtendedPrompt::new(glyph, texture, None)?)
}
