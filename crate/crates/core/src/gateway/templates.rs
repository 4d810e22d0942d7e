//! Versioned prompt templates.
//!
//! Bodies live under `templates/v1/` and are embedded at compile time.
//! Placeholders are `{identifier}`; any other brace sequence (for example
//! `{target, target, ...}`) is literal text.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::GatewayError;

pub const TEMPLATE_VERSION: &str = "v1";

const TOT_SELECT: &str = include_str!("../../templates/v1/tot_select.txt");
const JUDGE_SCORE: &str = include_str!("../../templates/v1/judge_score.txt");
const TARGET_EXTRACT: &str = include_str!("../../templates/v1/target_extract.txt");
const PRESENCE_QUERY: &str = include_str!("../../templates/v1/presence_query.txt");
const PROMPT_EXTEND: &str = include_str!("../../templates/v1/prompt_extend.txt");
const QA_SESSION: &str = include_str!("../../templates/v1/qa_session.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TemplateId {
    ToTSelect,
    JudgeScore,
    TargetExtract,
    /// Per-target yes/no question asked after target extraction.
    PresenceQuery,
    PromptExtend,
    QASession,
}

impl TemplateId {
    pub const ALL: [TemplateId; 6] = [
        TemplateId::ToTSelect,
        TemplateId::JudgeScore,
        TemplateId::TargetExtract,
        TemplateId::PresenceQuery,
        TemplateId::PromptExtend,
        TemplateId::QASession,
    ];

    pub fn template(self) -> PromptTemplate {
        let (body, bindings): (&'static str, &'static [&'static str]) = match self {
            TemplateId::ToTSelect => (TOT_SELECT, &["search_list", "input"]),
            TemplateId::JudgeScore => (JUDGE_SCORE, &["image", "prompt"]),
            TemplateId::TargetExtract => (TARGET_EXTRACT, &["input"]),
            TemplateId::PresenceQuery => (PRESENCE_QUERY, &["image", "target"]),
            TemplateId::PromptExtend => (PROMPT_EXTEND, &["language", "style_hints", "input"]),
            TemplateId::QASession => (QA_SESSION, &["image", "prompt", "summary"]),
        };
        PromptTemplate { id: self, body, bindings }
    }
}

impl FromStr for TemplateId {
    type Err = GatewayError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ToTSelect" => Ok(TemplateId::ToTSelect),
            "JudgeScore" => Ok(TemplateId::JudgeScore),
            "TargetExtract" => Ok(TemplateId::TargetExtract),
            "PresenceQuery" => Ok(TemplateId::PresenceQuery),
            "PromptExtend" => Ok(TemplateId::PromptExtend),
            "QASession" => Ok(TemplateId::QASession),
            other => Err(GatewayError::UnknownTemplate(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PromptTemplate {
    pub id: TemplateId,
    pub body: &'static str,
    /// Declared binding names; every placeholder in `body` is one of these.
    pub bindings: &'static [&'static str],
}

enum Piece<'a> {
    Text(&'a str),
    Placeholder(&'a str),
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn pieces(body: &str) -> Vec<Piece<'_>> {
    let mut out = Vec::new();
    let mut rest = body;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) if is_ident(&after[..close]) => {
                if open > 0 {
                    out.push(Piece::Text(&rest[..open]));
                }
                out.push(Piece::Placeholder(&after[..close]));
                rest = &after[close + 1..];
            }
            _ => {
                out.push(Piece::Text(&rest[..open + 1]));
                rest = after;
            }
        }
    }
    if !rest.is_empty() {
        out.push(Piece::Text(rest));
    }
    out
}

/// Placeholder names that occur in `body`, in order of first appearance.
pub fn placeholders(body: &str) -> Vec<&str> {
    let mut seen = Vec::new();
    for p in pieces(body) {
        if let Piece::Placeholder(name) = p {
            if !seen.contains(&name) {
                seen.push(name);
            }
        }
    }
    seen
}

impl PromptTemplate {
    /// Substitutes every placeholder in a single pass; binding values are
    /// never re-scanned.
    pub fn render(&self, bindings: &BTreeMap<String, String>) -> Result<String, GatewayError> {
        let mut out = String::with_capacity(self.body.len() + 64);
        for piece in pieces(self.body) {
            match piece {
                Piece::Text(t) => out.push_str(t),
                Piece::Placeholder(name) => {
                    let value = bindings
                        .get(name)
                        .ok_or_else(|| GatewayError::MissingBinding(name.to_string()))?;
                    out.push_str(value);
                }
            }
        }
        Ok(out)
    }
}

pub fn render_template(
    id: TemplateId,
    bindings: &BTreeMap<String, String>,
) -> Result<String, GatewayError> {
    id.template().render(bindings)
}

/// String-keyed variant for callers that carry template names as data.
pub fn render_named(name: &str, bindings: &BTreeMap<String, String>) -> Result<String, GatewayError> {
    render_template(name.parse()?, bindings)
}

/// Convenience for literal binding lists.
pub fn bind<const N: usize>(pairs: [(&str, &str); N]) -> BTreeMap<String, String> {
    pairs
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}
