//! Tree-of-thought model selection.
//!
//! [`decompose`] walks the model tree one level at a time, asking the judge
//! to pick among sibling names. [`select_model`] then scores candidate leaves
//! against every step of the resulting pathway and keeps the argmax.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::tree::{CategoryNode, LoraModel, ModelTree};
use super::TextureError;
use crate::domain::Metric;
use crate::gateway::templates::bind;
use crate::gateway::{parse_judge_triplet, parse_selected, render_template, Gateway, GatewayError, TemplateId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathwayStep {
    pub candidates: Vec<String>,
    pub selected: String,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PathwayTrace {
    pub steps: Vec<PathwayStep>,
}

impl PathwayTrace {
    pub fn selections(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.selected.as_str()).collect()
    }

    /// Category names of the terminal node: every selection but the last.
    pub fn terminal_path(&self) -> Vec<String> {
        let n = self.steps.len().saturating_sub(1);
        self.steps[..n].iter().map(|s| s.selected.clone()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    #[default]
    Greedy,
    Exhaustive,
}

fn clean(s: &str) -> String {
    s.trim().trim_end_matches('.').trim_matches(|c| c == '"' || c == '\'').trim().to_lowercase()
}

fn match_candidate(selected: &str, candidates: &[String]) -> Option<String> {
    let want = clean(selected);
    candidates.iter().find(|c| c.to_lowercase() == want).cloned()
}

fn level_candidates(node: &CategoryNode) -> (Vec<String>, bool) {
    if node.leaves.is_empty() {
        (node.children.iter().map(|c| c.name.clone()).collect(), false)
    } else {
        (node.leaves.iter().map(|l| l.name().to_string()).collect(), true)
    }
}

/// The rendered selection request for one tree level.
pub fn selection_request(texture_prompt: &str, candidates: &[String]) -> String {
    let list = candidates.join(", ");
    render_template(TemplateId::ToTSelect, &bind([("search_list", list.as_str()), ("input", texture_prompt)]))
        .expect("selection template bindings are complete")
}

/// The rendered judge request scoring `model` against one pathway step.
pub fn judge_request(step: &PathwayStep, model: &LoraModel) -> String {
    let image = model_description(model);
    render_template(TemplateId::JudgeScore, &bind([("image", image.as_str()), ("prompt", step.rationale.as_str())]))
        .expect("judge template bindings are complete")
}

fn ask(texture_prompt: &str, candidates: &[String], gw: &Gateway) -> Result<PathwayStep, TextureError> {
    let request = selection_request(texture_prompt, candidates);
    let mut last = String::new();
    for _ in 0..2 {
        let ex = gw.complete(&request)?;
        let selected = match parse_selected(&ex.response) {
            Ok(s) => s,
            Err(GatewayError::MarkerNotFound) => {
                last = ex.response.trim().to_string();
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        if let Some(name) = match_candidate(&selected, candidates) {
            return Ok(PathwayStep {
                candidates: candidates.to_vec(),
                selected: name,
                rationale: ex.response.trim().to_string(),
            });
        }
        last = selected;
    }
    Err(TextureError::SelectionNotInCandidates { selected: last, candidates: candidates.to_vec() })
}

/// Level-wise descent driven by the judge.
pub fn decompose(texture_prompt: &str, tree: &ModelTree, gw: &Gateway) -> Result<PathwayTrace, TextureError> {
    decompose_forced(texture_prompt, tree, gw, None)
}

/// Like [`decompose`], but the first levels follow `forced` without asking
/// the judge. Forced names match case-insensitively.
pub fn decompose_forced(
    texture_prompt: &str,
    tree: &ModelTree,
    gw: &Gateway,
    forced: Option<&[String]>,
) -> Result<PathwayTrace, TextureError> {
    if tree.leaf_count() == 0 {
        return Err(TextureError::EmptyTree);
    }
    let forced = forced.unwrap_or(&[]);
    let mut trace = PathwayTrace::default();
    let mut node = &tree.root;
    loop {
        let (candidates, terminal) = level_candidates(node);
        if candidates.is_empty() {
            return Err(TextureError::EmptyCandidatePool);
        }
        let step = match forced.get(trace.steps.len()) {
            Some(name) => match match_candidate(name, &candidates) {
                Some(selected) => PathwayStep {
                    candidates: candidates.clone(),
                    rationale: format!("Selected: {selected}"),
                    selected,
                },
                None => return Err(TextureError::SelectionNotInCandidates { selected: name.clone(), candidates }),
            },
            None => ask(texture_prompt, &candidates, gw)?,
        };
        let next = if terminal { None } else { node.child(&step.selected) };
        trace.steps.push(step);
        match next {
            Some(child) => node = child,
            None => return Ok(trace),
        }
    }
}

/// Heuristic value of a pathway step for a candidate model.
pub trait PathwayScorer {
    fn score(&self, step: &PathwayStep, model: &LoraModel) -> Result<f64, TextureError>;
}

/// Scores through the judge template with metric-weighted triplets.
pub struct JudgeScorer<'a> {
    pub gateway: &'a Gateway,
    pub weights: &'a BTreeMap<Metric, f64>,
}

impl PathwayScorer for JudgeScorer<'_> {
    fn score(&self, step: &PathwayStep, model: &LoraModel) -> Result<f64, TextureError> {
        score_pathway(step, model, self.weights, self.gateway)
    }
}

/// Text the judge sees in place of an image for a model.
pub fn model_description(m: &LoraModel) -> String {
    format!("lora:{} {}", m.id, m.trigger_words.join(", "))
}

/// Weighted mean of the judge triplet on `[0, 1]`. Relevance, quality and
/// style match are weighted by the consistency, quality and glyph metric
/// weights; all-zero weights fall back to a plain mean.
pub fn score_pathway(
    step: &PathwayStep,
    model: &LoraModel,
    weights: &BTreeMap<Metric, f64>,
    gw: &Gateway,
) -> Result<f64, TextureError> {
    let ex = gw.complete(&judge_request(step, model))?;
    let (r, q, s) = parse_judge_triplet(&ex.response)?;
    let w = |m| weights.get(&m).copied().unwrap_or(0.0);
    let mut ws = [w(Metric::Consistency), w(Metric::Quality), w(Metric::Glyph)];
    if ws.iter().sum::<f64>() <= 0.0 {
        ws = [1.0; 3];
    }
    let total: f64 = ws.iter().sum();
    Ok((ws[0] * r + ws[1] * q + ws[2] * s) / total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub model: LoraModel,
    pub score: f64,
    /// `(leaf id, aggregate score)`, best first, ties by id.
    pub ranking: Vec<(String, f64)>,
}

/// Argmax of the summed step scores over the candidate pool.
pub fn select_model_with(
    trace: &PathwayTrace,
    tree: &ModelTree,
    scorer: &dyn PathwayScorer,
    mode: SearchMode,
) -> Result<Selection, TextureError> {
    let pool: Vec<&LoraModel> = match mode {
        SearchMode::Exhaustive => tree.leaves(),
        SearchMode::Greedy => tree.node(&trace.terminal_path()).map(|n| n.leaves.iter().collect()).unwrap_or_default(),
    };
    if pool.is_empty() {
        return Err(TextureError::EmptyCandidatePool);
    }
    let mut ranking = Vec::with_capacity(pool.len());
    for m in &pool {
        let mut total = 0.0;
        for step in &trace.steps {
            total += scorer.score(step, m)?;
        }
        ranking.push((m.id.clone(), total));
    }
    ranking.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let (best, score) = ranking[0].clone();
    let model = pool.iter().find(|m| m.id == best).map(|m| (*m).clone()).expect("ranked from pool");
    Ok(Selection { model, score, ranking })
}

pub fn select_model(
    trace: &PathwayTrace,
    tree: &ModelTree,
    gw: &Gateway,
    mode: SearchMode,
    weights: &BTreeMap<Metric, f64>,
) -> Result<Selection, TextureError> {
    select_model_with(trace, tree, &JudgeScorer { gateway: gw, weights }, mode)
}
