//! Append-only session logs.
//!
//! `sessions/<id>.jsonl` holds one record per line:
//! `{"ts": .., "session": .., "kind": .., "payload": ..}`. A session is
//! rebuilt by replaying its events in order. The canonical form keeps only
//! `kind` and `payload`, so two runs of the same commands compare equal.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use forge_core::qa::UserAnswers;
use forge_core::{HyperParams, IterationRecord, UserPrompt};

use crate::error::{Result, ServiceError};
use crate::session::Status;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Event {
    Created { prompt: UserPrompt, params: HyperParams, interactive: bool, directive: String },
    Status { status: Status },
    Iteration { record: IterationRecord },
    Feedback { answers: UserAnswers },
    Params { params: HyperParams },
}

#[derive(Debug, Clone)]
pub struct SessionStore {
    dir: PathBuf,
}

pub fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 64 && id.chars().all(|c| c.is_ascii_hexdigit() || c == '-')
}

impl SessionStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        SessionStore { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn log_path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.jsonl"))
    }

    pub fn exists(&self, id: &str) -> bool {
        valid_id(id) && self.log_path(id).is_file()
    }

    pub fn ids(&self) -> Result<Vec<String>> {
        let mut ids = Vec::new();
        let Ok(entries) = fs::read_dir(&self.dir) else { return Ok(ids) };
        for e in entries {
            let p = e?.path();
            if p.extension().is_some_and(|x| x == "jsonl") {
                if let Some(s) = p.file_stem().and_then(|s| s.to_str()) {
                    ids.push(s.to_string());
                }
            }
        }
        ids.sort();
        Ok(ids)
    }

    pub fn append(&self, id: &str, event: &Event) -> Result<()> {
        let line = encode(id, event)?;
        fs::create_dir_all(&self.dir)?;
        let mut f = OpenOptions::new().create(true).append(true).open(self.log_path(id))?;
        f.write_all(line.as_bytes())?;
        f.sync_data()?;
        Ok(())
    }

    pub fn events(&self, id: &str) -> Result<Vec<Event>> {
        if !self.exists(id) {
            return Err(ServiceError::NotFound(id.into()));
        }
        let text = fs::read_to_string(self.log_path(id))?;
        parse_log(&text)
    }

    /// Raw log lines reduced to `{kind, payload}` with sorted keys.
    pub fn canonical(&self, id: &str) -> Result<String> {
        if !self.exists(id) {
            return Err(ServiceError::NotFound(id.into()));
        }
        canonical_log(&fs::read_to_string(self.log_path(id))?)
    }
}

fn encode(id: &str, event: &Event) -> Result<String> {
    let Value::Object(tagged) = serde_json::to_value(event).map_err(|e| ServiceError::Internal(e.to_string()))? else {
        return Err(ServiceError::Internal("event did not serialize to an object".into()));
    };
    let mut m = Map::new();
    m.insert("ts".into(), Value::String(chrono::Utc::now().to_rfc3339()));
    m.insert("session".into(), Value::String(id.into()));
    m.extend(tagged);
    let mut line = serde_json::to_string(&Value::Object(m)).map_err(|e| ServiceError::Internal(e.to_string()))?;
    line.push('\n');
    Ok(line)
}

fn corrupt(n: usize, m: impl std::fmt::Display) -> ServiceError {
    ServiceError::StorageUnavailable(format!("log line {}: {m}", n + 1))
}

fn kind_payload(n: usize, line: &str) -> Result<Value> {
    let v: Value = serde_json::from_str(line).map_err(|e| corrupt(n, e))?;
    let kind = v.get("kind").cloned().ok_or_else(|| corrupt(n, "missing kind"))?;
    let payload = v.get("payload").cloned().unwrap_or(Value::Null);
    Ok(json!({ "kind": kind, "payload": payload }))
}

pub fn parse_log(text: &str) -> Result<Vec<Event>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| serde_json::from_value(kind_payload(n, l)?).map_err(|e| corrupt(n, e)))
        .collect()
}

pub fn canonical_log(text: &str) -> Result<String> {
    let mut out = String::new();
    for (n, l) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        out.push_str(&kind_payload(n, l)?.to_string());
        out.push('\n');
    }
    Ok(out)
}
