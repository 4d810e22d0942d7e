//! Static checks over a visual program.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::program::VisualProgram;

/// Registered modules and their required arguments. A block satisfies its
/// module when every argument of at least one alternative is present.
pub const MODULES: &[(&str, &[&[&str]])] = &[
    ("ExtendPrompt", &[&["prompt"], &["glyph", "texture"]]),
    ("GlyphGen", &[&["text"]]),
    ("SemanticDeform", &[&["text", "concept"]]),
    ("ToTSelect", &[&["prompt"]]),
    ("TexRender", &[&["glyph", "prompt", "model"]]),
    ("Evaluate", &[&["image", "prompt"]]),
    ("UpdateParams", &[&["feedback"]]),
];

pub fn required_args(module: &str) -> Option<&'static [&'static [&'static str]]> {
    MODULES.iter().find(|(m, _)| *m == module).map(|(_, req)| *req)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Violation {
    UnknownModule { block: usize, module: String },
    UndefinedVariable { block: usize, name: String },
    DuplicateOutput { block: usize, name: String },
    MissingArg { block: usize, module: String, arg: String },
}

/// All violations in source order; within a block: module, references,
/// output, required arguments.
pub fn validate_program(p: &VisualProgram) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut defined = BTreeSet::new();
    for (i, b) in p.blocks.iter().enumerate() {
        let required = required_args(&b.module);
        if required.is_none() {
            out.push(Violation::UnknownModule { block: i, module: b.module.clone() });
        }
        for r in b.refs() {
            if !defined.contains(r) {
                out.push(Violation::UndefinedVariable { block: i, name: r.to_string() });
            }
        }
        if !defined.insert(b.output.as_str()) {
            out.push(Violation::DuplicateOutput { block: i, name: b.output.clone() });
        }
        if let Some(alternatives) = required {
            let missing_per_alt: Vec<Vec<&str>> = alternatives
                .iter()
                .map(|alt| alt.iter().copied().filter(|a| b.get(a).is_none()).collect())
                .collect();
            if missing_per_alt.iter().all(|m| !m.is_empty()) {
                let fewest = missing_per_alt.iter().min_by_key(|m| m.len()).expect("non-empty registry entry");
                for arg in fewest {
                    out.push(Violation::MissingArg { block: i, module: b.module.clone(), arg: arg.to_string() });
                }
            }
        }
    }
    out
}
