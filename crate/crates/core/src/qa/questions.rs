//! Per-iteration question set shown to the user.

use serde::{Deserialize, Serialize};

use crate::gateway::templates::bind;
use crate::gateway::{Gateway, TemplateId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AnswerType {
    Scale { min: f64, max: f64 },
    Choice { options: Vec<String> },
    FreeText,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    /// Answer field the reply fills: `g_cos`, `g_qua`, `g_gly` or `g_pref`.
    pub field: String,
    pub text: String,
    pub answer: AnswerType,
}

pub const GLYPH_CHOICES: [&str; 3] = ["keep", "simplify", "more creative"];

pub fn default_questions() -> Vec<Question> {
    let scale = || AnswerType::Scale { min: 0.0, max: 1.0 };
    vec![
        Question { field: "g_cos".into(), text: "How well does the image match your prompt?".into(), answer: scale() },
        Question { field: "g_qua".into(), text: "How would you rate the overall image quality?".into(), answer: scale() },
        Question {
            field: "g_gly".into(),
            text: "Are the letters acceptable?".into(),
            answer: AnswerType::Choice { options: GLYPH_CHOICES.map(String::from).to_vec() },
        },
        Question {
            field: "g_pref".into(),
            text: "What would you like to change?".into(),
            answer: AnswerType::FreeText,
        },
    ]
}

fn strip_hint(line: &str) -> &str {
    let body = line.trim_start_matches(|c: char| c.is_ascii_digit()).trim_start_matches(['.', ')']).trim();
    match body.rfind(" (") {
        Some(i) if body.ends_with(')') => body[..i].trim(),
        _ => body,
    }
}

/// Question texts phrased by the chat backend; the fixed schema is kept and
/// the default wording fills any question the backend did not produce.
pub fn session_questions(gw: &Gateway, image: &str, prompt: &str, summary: &str) -> Vec<Question> {
    let mut qs = default_questions();
    let Ok(ex) = gw.complete_template(
        TemplateId::QASession,
        &bind([("image", image), ("prompt", prompt), ("summary", summary)]),
    ) else {
        return qs;
    };
    for line in ex.response.lines().map(str::trim) {
        let Some(n) = line.chars().next().and_then(|c| c.to_digit(10)) else { continue };
        let text = strip_hint(line);
        if (1..=4).contains(&n) && !text.is_empty() {
            qs[n as usize - 1].text = text.to_string();
        }
    }
    qs
}
