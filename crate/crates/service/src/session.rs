//! Design sessions and their lifecycle.
//!
//! ```text
//! Created -> Running -> AwaitingFeedback -> Running -> ... -> Done | Failed
//! ```
//!
//! Interactive sessions synthesize one candidate per `iterate` call and wait
//! for answers in between; autonomous sessions spend the whole budget in a
//! single call. All state lives in the session log, so a restarted process
//! picks up where the previous one stopped.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::{Arc, Mutex};

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use forge_core::domain::{ArtifactRef, Language};
use forge_core::gateway::image_ref;
use forge_core::glyph::select_style;
use forge_core::hash::sha256_hex;
use forge_core::pipeline::{plan, validate_program};
use forge_core::qa::{
    default_questions, merge, session_questions, tune, update_params_with, Evaluation, Question, TuneConfig,
    TuneHooks, UserAnswers,
};
use forge_core::{HyperParams, IterationRecord, UserPrompt};

use crate::error::{Result, ServiceError};
use crate::interpreter::{Interpreter, TraceStep};
use crate::runtime::Runtime;
use crate::store::{valid_id, Event, SessionStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Created,
    Running,
    AwaitingFeedback,
    Done,
    Failed,
}

impl Status {
    pub fn can_move_to(self, next: Status) -> bool {
        use Status::*;
        matches!(
            (self, next),
            (Created, Running) | (Running, AwaitingFeedback | Done | Failed) | (AwaitingFeedback, Running)
        )
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, Status::Done | Status::Failed)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::Created => "created",
            Status::Running => "running",
            Status::AwaitingFeedback => "awaiting_feedback",
            Status::Done => "done",
            Status::Failed => "failed",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Session {
    pub id: String,
    pub prompt: UserPrompt,
    pub params: HyperParams,
    pub interactive: bool,
    pub directive: String,
    pub status: Status,
    pub history: Vec<IterationRecord>,
    /// Answers submitted since the last iteration.
    pub pending: Vec<UserAnswers>,
}

impl Session {
    pub fn replay(id: &str, events: &[Event]) -> Result<Session> {
        let mut it = events.iter();
        let Some(Event::Created { prompt, params, interactive, directive }) = it.next() else {
            return Err(ServiceError::StorageUnavailable(format!("log of {id} does not start with `created`")));
        };
        let mut s = Session {
            id: id.to_string(),
            prompt: prompt.clone(),
            params: params.clone(),
            interactive: *interactive,
            directive: directive.clone(),
            status: Status::Created,
            history: Vec::new(),
            pending: Vec::new(),
        };
        for e in it {
            s.apply(e);
        }
        Ok(s)
    }

    fn apply(&mut self, e: &Event) {
        match e {
            Event::Created { .. } => {}
            Event::Status { status } => self.status = *status,
            Event::Iteration { record } => {
                self.history.push(record.clone());
                self.pending.clear();
            }
            Event::Feedback { answers } => self.pending.push(answers.clone()),
            Event::Params { params } => self.params = params.clone(),
        }
    }

    /// Highest-scoring iteration; ties keep the earliest.
    pub fn best(&self) -> Option<&IterationRecord> {
        let mut best: Option<&IterationRecord> = None;
        for r in &self.history {
            if let Some(s) = r.score {
                if best.and_then(|b| b.score).is_none_or(|b| s > b) {
                    best = Some(r);
                }
            }
        }
        best
    }

    pub fn budget_left(&self) -> u32 {
        self.params.qa.tau.saturating_sub(self.history.len() as u32)
    }

    fn reached_threshold(&self) -> bool {
        self.history.iter().any(|r| r.score.is_some_and(|s| s >= self.params.qa.theta))
    }

    pub fn owns_artifact(&self, r: &str) -> bool {
        self.history.iter().any(|h| h.artifact_ref.as_ref().is_some_and(|a| a.0 == r))
    }
}

/// Combines queued answers; later values win and complaints accumulate.
pub fn combine_answers(all: &[UserAnswers]) -> Option<UserAnswers> {
    if all.is_empty() {
        return None;
    }
    let mut out = UserAnswers::default();
    for a in all {
        out.g_cos = a.g_cos.or(out.g_cos);
        out.g_qua = a.g_qua.or(out.g_qua);
        out.g_gly = a.g_gly.or(out.g_gly);
        out.g_pref.extend(a.g_pref.clone());
        if !a.free_text.is_empty() {
            if !out.free_text.is_empty() {
                out.free_text.push('\n');
            }
            out.free_text.push_str(&a.free_text);
        }
        out.glyph_complaint |= a.glyph_complaint;
    }
    Some(out)
}

/// Recursively overlays `patch` onto `base`.
pub fn merge_json(base: &mut Json, patch: &Json) {
    match (base, patch) {
        (Json::Object(b), Json::Object(p)) => {
            for (k, v) in p {
                merge_json(b.entry(k.clone()).or_insert(Json::Null), v);
            }
        }
        (b, p) => *b = p.clone(),
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewSession {
    pub prompt: String,
    #[serde(default)]
    pub language: Option<Language>,
    #[serde(default)]
    pub style_hints: Vec<String>,
    #[serde(default)]
    pub interactive: Option<bool>,
    /// Partial hyperparameters overlaid on the configured defaults.
    #[serde(default)]
    pub params: Option<Json>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IterateOutcome {
    pub session: Session,
    pub records: Vec<IterationRecord>,
    pub traces: Vec<Vec<TraceStep>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub session: String,
    pub artifacts: Vec<String>,
    /// SHA-256 of every exported file, keyed by relative path.
    pub files: std::collections::BTreeMap<String, String>,
}

struct Hooks<'a> {
    rt: &'a Runtime,
    store: &'a SessionStore,
    id: &'a str,
    prompt: &'a UserPrompt,
    answers: Option<UserAnswers>,
    traces: Vec<Vec<TraceStep>>,
    log_error: Option<ServiceError>,
}

impl TuneHooks for Hooks<'_> {
    fn run(&mut self, _index: u32, params: &mut HyperParams) -> std::result::Result<Evaluation, String> {
        let ext = forge_core::pipeline::extend_prompt(self.prompt, params, &self.rt.gateway).map_err(|e| e.to_string())?;
        if params.glyph.style_kind.is_none() {
            params.glyph.style_kind = Some(select_style(&ext, params));
        }
        let program = plan(&ext, params);
        let violations = validate_program(&program);
        if !violations.is_empty() {
            return Err(ServiceError::InvalidProgram(violations).to_string());
        }
        let mut interp = Interpreter::new(self.rt, self.prompt, params);
        match interp.execute(&program) {
            Ok(ex) => {
                self.traces.push(ex.trace.clone());
                Ok(Evaluation {
                    artifact_ref: ex.artifact().cloned(),
                    extended_prompt: Some(ext),
                    feedback: ex.feedback().cloned().ok_or_else(|| "program produced no evaluation".to_string()),
                })
            }
            Err((ex, e)) => {
                self.traces.push(ex.trace.clone());
                match ex.artifact() {
                    Some(a) => Ok(Evaluation { artifact_ref: Some(a.clone()), extended_prompt: Some(ext), feedback: Err(e) }),
                    None => Err(e),
                }
            }
        }
    }

    fn user_answers(&mut self, _index: u32) -> Option<UserAnswers> {
        self.answers.take()
    }

    fn record(&mut self, record: &IterationRecord) {
        if let Err(e) = self.store.append(self.id, &Event::Iteration { record: record.clone() }) {
            self.log_error.get_or_insert(e);
        }
    }
}

pub struct Orchestrator {
    rt: Runtime,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

impl Orchestrator {
    pub fn new(rt: Runtime) -> Self {
        Orchestrator { rt, locks: Mutex::new(HashMap::new()) }
    }

    pub fn runtime(&self) -> &Runtime {
        &self.rt
    }

    fn lock(&self, id: &str) -> Arc<Mutex<()>> {
        let mut m = self.locks.lock().unwrap_or_else(|p| p.into_inner());
        m.entry(id.to_string()).or_default().clone()
    }

    fn store(&self) -> &SessionStore {
        &self.rt.sessions
    }

    fn set_status(&self, s: &mut Session, next: Status) -> Result<()> {
        if s.status == next {
            return Ok(());
        }
        if !s.status.can_move_to(next) {
            return Err(ServiceError::Internal(format!("illegal transition {} -> {next}", s.status)));
        }
        self.store().append(&s.id, &Event::Status { status: next })?;
        s.status = next;
        Ok(())
    }

    pub fn create(&self, req: NewSession) -> Result<Session> {
        let mut prompt = UserPrompt::new(req.prompt, req.language.unwrap_or(forge_core::Language::En))
            .map_err(|e| ServiceError::InvalidInput(e.to_string()))?;
        prompt.style_hints = req.style_hints;
        prompt.validate().map_err(|e| ServiceError::InvalidInput(e.to_string()))?;
        let params = match &req.params {
            None => self.rt.config.params.clone(),
            Some(patch) => {
                let mut base = serde_json::to_value(&self.rt.config.params).map_err(|e| ServiceError::Internal(e.to_string()))?;
                merge_json(&mut base, patch);
                HyperParams::from_json(&base.to_string()).map_err(|e| ServiceError::InvalidInput(e.to_string()))?
            }
        };
        params.validate().map_err(|e| ServiceError::InvalidInput(e.to_string()))?;
        let id = format!("{:032x}", rand::thread_rng().gen::<u128>());
        let event = Event::Created {
            prompt,
            params,
            interactive: req.interactive.unwrap_or(self.rt.config.interactive),
            directive: self.rt.config.directive.clone(),
        };
        self.store().append(&id, &event)?;
        Session::replay(&id, &[event])
    }

    pub fn get(&self, id: &str) -> Result<Session> {
        Session::replay(id, &self.store().events(id)?)
    }

    pub fn list(&self) -> Result<Vec<String>> {
        self.store().ids()
    }

    /// Interactive: one candidate, then `AwaitingFeedback` unless the
    /// threshold or the budget ends the session. Autonomous: the whole
    /// remaining budget. Queued answers steer the parameter update before
    /// the pass and are merged into the pass's own bundle.
    pub fn iterate(&self, id: &str) -> Result<IterateOutcome> {
        let lock = self.lock(id);
        let _guard = lock.lock().unwrap_or_else(|p| p.into_inner());
        let mut s = self.get(id)?;
        if s.status.is_terminal() {
            return Err(ServiceError::WrongState { op: "iterate", status: s.status.to_string() });
        }
        let categories = self.rt.categories();
        if s.interactive && s.status == Status::AwaitingFeedback {
            if let Some(g) = s.history.last().and_then(|r| r.feedback.as_ref()) {
                let merged = merge(g, combine_answers(&s.pending).as_ref());
                let next = update_params_with(&merged, &s.params, &s.directive, &self.rt.config.rules, &categories)
                    .map_err(|e| ServiceError::Internal(e.to_string()))?;
                if next != s.params {
                    self.store().append(id, &Event::Params { params: next.clone() })?;
                    s.params = next;
                }
            }
        }
        self.set_status(&mut s, Status::Running)?;

        let mut run = s.params.clone();
        run.qa.tau = if s.interactive { 1 } else { s.budget_left().max(1) };
        let cfg = TuneConfig {
            directive: s.directive.clone(),
            rules: self.rt.config.rules.clone(),
            categories,
            start_index: s.history.len() as u32,
        };
        let mut hooks = Hooks {
            rt: &self.rt,
            store: self.store(),
            id,
            prompt: &s.prompt,
            answers: combine_answers(&s.pending),
            traces: Vec::new(),
            log_error: None,
        };
        let outcome = if s.budget_left() == 0 {
            None
        } else {
            Some(tune(&run, &mut hooks, &cfg).map_err(|e| ServiceError::Internal(e.to_string()))?)
        };
        let traces = std::mem::take(&mut hooks.traces);
        if let Some(e) = hooks.log_error.take() {
            return Err(e);
        }
        let mut records = Vec::new();
        if let Some(out) = outcome {
            let mut next = out.params.clone();
            next.qa.tau = s.params.qa.tau;
            records = out.records;
            s.history.extend(records.iter().cloned());
            s.pending.clear();
            if next != s.params {
                self.store().append(id, &Event::Params { params: next.clone() })?;
                s.params = next;
            }
        }

        let any_success = s.history.iter().any(|r| r.score.is_some());
        let next = if s.reached_threshold() {
            Status::Done
        } else if s.budget_left() == 0 || !s.interactive {
            if any_success {
                Status::Done
            } else {
                Status::Failed
            }
        } else {
            Status::AwaitingFeedback
        };
        self.set_status(&mut s, next)?;
        Ok(IterateOutcome { session: s, records, traces })
    }

    pub fn submit_feedback(&self, id: &str, answers: UserAnswers) -> Result<Session> {
        let lock = self.lock(id);
        let _guard = lock.lock().unwrap_or_else(|p| p.into_inner());
        let mut s = self.get(id)?;
        if s.status != Status::AwaitingFeedback {
            return Err(ServiceError::WrongState { op: "submit feedback", status: s.status.to_string() });
        }
        answers.validate().map_err(|e| ServiceError::InvalidInput(e.to_string()))?;
        self.store().append(id, &Event::Feedback { answers: answers.clone() })?;
        s.pending.push(answers);
        drop(_guard);
        if self.rt.config.auto_continue {
            return Ok(self.iterate(id)?.session);
        }
        Ok(s)
    }

    pub fn questions(&self, id: &str) -> Result<Vec<Question>> {
        let s = self.get(id)?;
        let Some(last) = s.history.iter().rev().find(|r| r.artifact_ref.is_some()) else {
            return Ok(default_questions());
        };
        let a = last.artifact_ref.as_ref().map(|a| image_ref(&a.0)).unwrap_or_default();
        let missing = last.feedback.as_ref().map(|g| g.missing_targets.join(", ")).unwrap_or_default();
        let summary = match last.score {
            Some(score) if missing.is_empty() => format!("score {score:.2}"),
            Some(score) => format!("score {score:.2}; missing: {missing}"),
            None => "not scored".to_string(),
        };
        Ok(session_questions(&self.rt.gateway, &a, &s.prompt.text, &summary))
    }

    pub fn artifact(&self, id: &str, r: &str) -> Result<Vec<u8>> {
        let s = self.get(id)?;
        if !valid_id(r) || !s.owns_artifact(r) {
            return Err(ServiceError::ArtifactNotFound(r.into()));
        }
        self.rt
            .artifacts
            .read_image(&ArtifactRef(r.into()))
            .map_err(|_| ServiceError::ArtifactNotFound(r.into()))
    }

    /// Writes `session.jsonl`, every referenced artifact and `manifest.json`
    /// into `dest`.
    pub fn export(&self, id: &str, dest: &Path) -> Result<Manifest> {
        let s = self.get(id)?;
        fs::create_dir_all(dest.join("artifacts"))?;
        let mut files = std::collections::BTreeMap::new();
        let log = fs::read(self.store().log_path(id))?;
        fs::write(dest.join("session.jsonl"), &log)?;
        files.insert("session.jsonl".to_string(), sha256_hex(&log));
        let mut artifacts: Vec<String> = s.history.iter().filter_map(|r| r.artifact_ref.as_ref().map(|a| a.0.clone())).collect();
        artifacts.sort();
        artifacts.dedup();
        let out = forge_core::artifact::ArtifactStore::new(dest.join("artifacts"));
        for a in &artifacts {
            let r = ArtifactRef(a.clone());
            self.rt.artifacts.copy_to(&r, &out)?;
            for p in [out.image_path(&r), out.metadata_path(&r)] {
                let name = format!("artifacts/{}", p.file_name().and_then(|n| n.to_str()).unwrap_or_default());
                files.insert(name, sha256_hex(&fs::read(&p)?));
            }
        }
        if let forge_core::gateway::BackendMode::Replay { fixture_path, .. } = &self.rt.config.gateway.mode {
            files.insert("fixture".into(), sha256_hex(&fs::read(fixture_path)?));
        }
        let manifest = Manifest { session: id.to_string(), artifacts, files };
        let json = serde_json::to_vec_pretty(&manifest).map_err(|e| ServiceError::Internal(e.to_string()))?;
        fs::write(dest.join("manifest.json"), json)?;
        Ok(manifest)
    }

    /// Loads an exported session after checking every file hash.
    pub fn import(&self, src: &Path) -> Result<Session> {
        let text = fs::read(src.join("manifest.json"))?;
        let manifest: Manifest =
            serde_json::from_slice(&text).map_err(|e| ServiceError::InvalidInput(format!("manifest: {e}")))?;
        if !valid_id(&manifest.session) {
            return Err(ServiceError::InvalidInput("manifest: bad session id".into()));
        }
        for (name, hash) in &manifest.files {
            if name == "fixture" {
                continue;
            }
            let got = sha256_hex(&fs::read(src.join(name))?);
            if &got != hash {
                return Err(ServiceError::InvalidInput(format!("{name}: hash mismatch")));
            }
        }
        let lock = self.lock(&manifest.session);
        let _guard = lock.lock().unwrap_or_else(|p| p.into_inner());
        if self.store().exists(&manifest.session) {
            return Err(ServiceError::AlreadyExists(format!("session {}", manifest.session)));
        }
        let log = fs::read_to_string(src.join("session.jsonl"))?;
        let session = Session::replay(&manifest.session, &crate::store::parse_log(&log)?)?;
        let from = forge_core::artifact::ArtifactStore::new(src.join("artifacts"));
        for a in &manifest.artifacts {
            let r = ArtifactRef(a.clone());
            if !self.rt.artifacts.exists(&r) {
                from.copy_to(&r, &self.rt.artifacts)?;
            }
        }
        fs::create_dir_all(self.store().dir())?;
        fs::write(self.store().log_path(&manifest.session), log)?;
        Ok(session)
    }

    pub fn canonical_log(&self, id: &str) -> Result<String> {
        self.store().canonical(id)
    }
}
