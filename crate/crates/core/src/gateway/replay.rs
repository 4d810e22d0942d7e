//! Fixture replay backend.
//!
//! Fixture files are JSON lines. Each record is either
//! `{"hash": "<16 hex>", "response": "..."}` or `{"default": "..."}`; an
//! optional `note` field is ignored.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ChatBackend, GatewayError, OnMiss};
use crate::hash::stable_hash_hex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FixtureRecord {
    Entry {
        hash: String,
        response: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        note: Option<String>,
    },
    Default {
        default: String,
    },
}

impl FixtureRecord {
    pub fn for_prompt(prompt: &str, response: impl Into<String>, note: Option<String>) -> Self {
        FixtureRecord::Entry { hash: prompt_key(prompt), response: response.into(), note }
    }
}

pub fn prompt_key(prompt: &str) -> String {
    stable_hash_hex(prompt.as_bytes())
}

pub struct ReplayBackend {
    id: String,
    entries: HashMap<String, String>,
    default: Option<String>,
    on_miss: OnMiss,
    fallback: Option<Box<dyn ChatBackend>>,
}

impl ReplayBackend {
    pub fn load(path: &Path, on_miss: OnMiss) -> Result<Self, GatewayError> {
        let text = fs::read_to_string(path).map_err(|e| GatewayError::Fixture(format!("{}: {e}", path.display())))?;
        let mut backend = Self::parse(&text, on_miss)?;
        backend.id = format!("replay:{}", path.file_name().and_then(|n| n.to_str()).unwrap_or("fixture"));
        Ok(backend)
    }

    pub fn parse(text: &str, on_miss: OnMiss) -> Result<Self, GatewayError> {
        let mut entries = HashMap::new();
        let mut default = None;
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let rec: FixtureRecord =
                serde_json::from_str(line).map_err(|e| GatewayError::Fixture(format!("line {}: {e}", n + 1)))?;
            match rec {
                FixtureRecord::Entry { hash, response, .. } => {
                    entries.insert(hash.to_ascii_lowercase(), response);
                }
                FixtureRecord::Default { default: d } => default = Some(d),
            }
        }
        Ok(ReplayBackend { id: "replay".into(), entries, default, on_miss, fallback: None })
    }

    pub fn with_fallback(mut self, fallback: impl ChatBackend + 'static) -> Self {
        self.fallback = Some(Box::new(fallback));
        self
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl ChatBackend for ReplayBackend {
    fn id(&self) -> String {
        self.id.clone()
    }

    fn complete(&self, prompt: &str) -> Result<String, GatewayError> {
        let key = prompt_key(prompt);
        if let Some(r) = self.entries.get(&key) {
            return Ok(r.clone());
        }
        match (self.on_miss, &self.default, &self.fallback) {
            (OnMiss::Default, Some(d), _) => Ok(d.clone()),
            (OnMiss::Mock, _, Some(fb)) => fb.complete(prompt),
            _ => Err(GatewayError::FixtureMiss(key)),
        }
    }
}
