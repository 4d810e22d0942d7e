//! Rule-based offline responder.
//!
//! Recognizes each template by its fixed wording and answers in the shape the
//! parsers expect. Image references of the form `artifact:<ref>` are resolved
//! against an artifact directory; the recorded render prompt then stands in
//! for the picture.

use std::path::PathBuf;

use super::{ChatBackend, GatewayError};
use crate::artifact::ArtifactStore;
use crate::domain::ArtifactRef;
use crate::pipeline::extend::{fallback_split, words};

pub struct MockBackend {
    store: Option<ArtifactStore>,
}

fn line_after<'a>(prompt: &'a str, marker: &str) -> Option<&'a str> {
    prompt.lines().find_map(|l| l.strip_prefix(marker)).map(str::trim)
}

/// Loose word match: equal, or one is a prefix of the other with at least four letters.
fn related(a: &str, b: &str) -> bool {
    if a == b {
        return true;
    }
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    short.chars().count() >= 4 && long.starts_with(short)
}

fn overlap(query: &[String], pool: &[String]) -> usize {
    query.iter().filter(|q| pool.iter().any(|p| related(q, p))).count()
}

impl MockBackend {
    pub fn new(artifact_dir: Option<PathBuf>) -> Self {
        MockBackend { store: artifact_dir.map(ArtifactStore::new) }
    }

    /// What the mock "sees" for an image reference.
    fn describe(&self, image: &str) -> String {
        if let (Some(r), Some(store)) = (image.strip_prefix("artifact:"), &self.store) {
            if let Ok(meta) = store.read_metadata(&ArtifactRef(r.to_string())) {
                return meta.request.prompt;
            }
        }
        image.to_string()
    }

    fn tot(&self, prompt: &str) -> String {
        let list = line_after(prompt, "Input list:").unwrap_or("");
        let input = words(line_after(prompt, "Input prompt:").unwrap_or(""));
        let mut best: Option<(&str, usize)> = None;
        for cand in list.split(',').map(str::trim).filter(|c| !c.is_empty()) {
            let score = overlap(&words(cand), &input);
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((cand, score));
            }
        }
        match best {
            Some((c, _)) => format!("Selected: {c}"),
            None => "Selected: none".into(),
        }
    }

    fn judge(&self, prompt: &str) -> String {
        let seen = words(&self.describe(line_after(prompt, "Image:").unwrap_or("")));
        let asked = words(line_after(prompt, "Prompt:").unwrap_or(""));
        let frac = if asked.is_empty() { 1.0 } else { overlap(&asked, &seen) as f64 / asked.len() as f64 };
        let relevance = 1.0 + 9.0 * frac;
        format!("{relevance:.1} 8 {relevance:.1}")
    }

    fn presence(&self, prompt: &str) -> String {
        let seen = self.describe(line_after(prompt, "Image:").unwrap_or("")).to_lowercase();
        let target = line_after(prompt, "Is ")
            .and_then(|l| l.split(" present in the photo?").next())
            .unwrap_or("")
            .to_lowercase();
        if !target.is_empty() && seen.contains(&target) {
            "Yes".into()
        } else {
            "No".into()
        }
    }

    fn targets(&self, prompt: &str) -> String {
        let input = line_after(prompt, "<Input sentence>:").unwrap_or("");
        let items: Vec<&str> = input.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        format!("Targets:{{{}}}", items.join(", "))
    }

    fn extend(&self, prompt: &str) -> String {
        let input = line_after(prompt, "Input prompt:").unwrap_or("");
        let (glyph, texture) = fallback_split(input);
        format!("Glyph: {glyph}\nTexture: {texture}\nSemantic: none")
    }
}

impl ChatBackend for MockBackend {
    fn id(&self) -> String {
        "mock".into()
    }

    fn complete(&self, prompt: &str) -> Result<String, GatewayError> {
        Ok(if prompt.contains("Please answer Yes or No.") {
            self.presence(prompt)
        } else if prompt.contains("scoring judge") {
            self.judge(prompt)
        } else if prompt.contains("<Input sentence>:") {
            self.targets(prompt)
        } else if prompt.contains("Glyph: [the exact text") {
            self.extend(prompt)
        } else if prompt.contains("Input list:") {
            self.tot(prompt)
        } else if prompt.contains("collecting feedback") {
            prompt.lines().filter(|l| l.starts_with(|c: char| c.is_ascii_digit())).collect::<Vec<_>>().join("\n")
        } else {
            String::new()
        })
    }
}
