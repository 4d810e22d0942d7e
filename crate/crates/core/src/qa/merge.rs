use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::{DomainError, FeedbackBundle, Metric, Source};

/// Optional answers to the per-iteration questions.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct UserAnswers {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_cos: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_qua: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_gly: Option<f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub g_pref: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub free_text: String,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub glyph_complaint: bool,
}

impl UserAnswers {
    pub fn validate(&self) -> Result<(), DomainError> {
        for (field, v) in [("g_cos", self.g_cos), ("g_qua", self.g_qua), ("g_gly", self.g_gly)] {
            if let Some(v) = v {
                if !(0.0..=1.0).contains(&v) {
                    return Err(DomainError::ScoreOutOfRange { field, value: v });
                }
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        *self == UserAnswers::default()
    }
}

/// Field-wise merge where every value the user gave replaces the model's.
pub fn merge(gm: &FeedbackBundle, gu: Option<&UserAnswers>) -> FeedbackBundle {
    let mut out = gm.clone();
    out.source = Source::Merged;
    let Some(u) = gu else { return out };
    if let Some(v) = u.g_cos {
        out.g_cos = v;
        out.user_fields.insert(Metric::Consistency);
    }
    if let Some(v) = u.g_qua {
        out.g_qua = v;
        out.user_fields.insert(Metric::Quality);
    }
    if let Some(v) = u.g_gly {
        out.g_gly = Some(v);
        out.user_fields.insert(Metric::Glyph);
    }
    if !u.g_pref.is_empty() {
        out.g_pref = Some(u.g_pref.clone());
    }
    out.glyph_complaint |= u.glyph_complaint;
    out
}
