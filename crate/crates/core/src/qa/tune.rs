//! Fixed-budget tuning loop.
//!
//! Every pass synthesizes one candidate, evaluates it, merges queued user
//! answers, computes the loss and records the iteration. The loop stops once
//! `1 - loss >= theta` or after `tau` passes and returns the best iterate.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::loss::compute_loss;
use super::merge::{merge, UserAnswers};
use super::rules::{update_params_with, RuleConfig};
use super::QaError;
use crate::domain::{ArtifactRef, ExtendedPrompt, FeedbackBundle, HyperParams, IterationRecord, Metric};
use crate::pipeline::Directive;

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub artifact_ref: Option<ArtifactRef>,
    pub extended_prompt: Option<ExtendedPrompt>,
    /// Model-sourced bundle; `None` when evaluation failed.
    pub feedback: Result<FeedbackBundle, String>,
}

pub trait TuneHooks {
    /// Produces and evaluates one candidate. `params` may be refined in
    /// place (for example with a fresh model ranking); the refined value is
    /// what the iteration record stores.
    fn run(&mut self, index: u32, params: &mut HyperParams) -> Result<Evaluation, String>;

    /// Answers queued since the previous pass.
    fn user_answers(&mut self, _index: u32) -> Option<UserAnswers> {
        None
    }

    fn record(&mut self, _record: &IterationRecord) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopReason {
    Threshold,
    Budget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneOutcome {
    pub records: Vec<IterationRecord>,
    /// Position in `records` of the highest score; ties keep the earliest.
    pub best: Option<usize>,
    /// Parameters the next pass would use.
    pub params: HyperParams,
    pub iterations: u32,
    pub stop: StopReason,
}

impl TuneOutcome {
    pub fn best_record(&self) -> Option<&IterationRecord> {
        self.best.map(|i| &self.records[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneConfig {
    pub directive: String,
    pub rules: RuleConfig,
    /// Top-level model categories for preference pinning.
    pub categories: Vec<String>,
    /// Index given to the first recorded iteration.
    pub start_index: u32,
}

impl Default for TuneConfig {
    fn default() -> Self {
        TuneConfig {
            directive: Directive::Auto.as_str().into(),
            rules: RuleConfig::default(),
            categories: Vec::new(),
            start_index: 0,
        }
    }
}

fn score_of(g: &mut FeedbackBundle, weights: &BTreeMap<Metric, f64>) -> Result<f64, QaError> {
    let loss = compute_loss(g, weights)?;
    g.loss = loss;
    Ok(1.0 - loss)
}

pub fn tune(params: &HyperParams, hooks: &mut dyn TuneHooks, cfg: &TuneConfig) -> Result<TuneOutcome, QaError> {
    if params.qa.tau < 1 {
        return Err(QaError::InvalidTau);
    }
    cfg.directive.parse::<Directive>().map_err(|_| QaError::UnknownDirective(cfg.directive.clone()))?;
    let mut current = params.clone();
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    let mut stop = StopReason::Budget;

    for i in 0..params.qa.tau {
        let index = cfg.start_index + i;
        let mut snapshot = current.clone();
        let answers = hooks.user_answers(index);
        let mut record = IterationRecord {
            index,
            extended_prompt: None,
            params_snapshot: snapshot.clone(),
            artifact_ref: None,
            feedback: None,
            score: None,
            error: None,
        };
        let mut merged = None;
        match hooks.run(index, &mut snapshot) {
            Err(e) => record.error = Some(e),
            Ok(eval) => {
                record.artifact_ref = eval.artifact_ref;
                record.extended_prompt = eval.extended_prompt;
                match eval.feedback {
                    Err(e) => record.error = Some(e),
                    Ok(gm) => {
                        let mut g = merge(&gm, answers.as_ref());
                        match score_of(&mut g, &snapshot.qa.metric_weights) {
                            Ok(s) => {
                                record.score = Some(s);
                                merged = Some(g.clone());
                            }
                            Err(e) => record.error = Some(e.to_string()),
                        }
                        record.feedback = Some(g);
                    }
                }
            }
        }
        record.params_snapshot = snapshot.clone();
        hooks.record(&record);
        let score = record.score;
        records.push(record);
        current = snapshot;

        if let Some(s) = score {
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((records.len() - 1, s));
            }
            if s >= params.qa.theta {
                stop = StopReason::Threshold;
                break;
            }
        }
        if i + 1 == params.qa.tau {
            break;
        }
        if let Some(g) = merged {
            current = update_params_with(&g, &current, &cfg.directive, &cfg.rules, &cfg.categories)?;
        }
    }

    Ok(TuneOutcome {
        iterations: records.len() as u32,
        best: best.map(|b| b.0),
        records,
        params: current,
        stop,
    })
}
