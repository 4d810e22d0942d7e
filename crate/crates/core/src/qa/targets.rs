use serde::{Deserialize, Serialize};

use super::QaError;
use crate::gateway::templates::bind;
use crate::gateway::{parse_targets, Gateway, TemplateId};

/// Visually checkable targets, deduplicated case-insensitively in first-seen order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TargetList {
    targets: Vec<String>,
}

impl TargetList {
    pub fn new<I, S>(items: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut targets: Vec<String> = Vec::new();
        for item in items {
            let t = item.as_ref().trim();
            if !t.is_empty() && !targets.iter().any(|k| k.to_lowercase() == t.to_lowercase()) {
                targets.push(t.to_string());
            }
        }
        TargetList { targets }
    }

    pub fn as_slice(&self) -> &[String] {
        &self.targets
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn split_commas(text: &str) -> Self {
        TargetList::new(text.split(','))
    }
}

/// Asks the chat backend for targets. Without a usable answer and with
/// `fallback` set, the raw prompt is split on commas.
pub fn extract_targets(prompt: &str, gw: &Gateway, fallback: bool) -> Result<TargetList, QaError> {
    if prompt.trim().is_empty() {
        return Ok(TargetList::default());
    }
    match gw.complete_template(TemplateId::TargetExtract, &bind([("input", prompt)])) {
        Ok(ex) => match parse_targets(&ex.response) {
            Some(items) => Ok(TargetList::new(items)),
            None if fallback => Ok(TargetList::split_commas(prompt)),
            None => Err(QaError::ParseFailure(ex.response)),
        },
        Err(_) if fallback => Ok(TargetList::split_commas(prompt)),
        Err(e) => Err(e.into()),
    }
}
