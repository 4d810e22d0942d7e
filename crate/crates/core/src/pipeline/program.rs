//! Visual-program data model and canonical printer.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum ArgValue {
    Str(String),
    Num(f64),
    Ref(String),
}

impl ArgValue {
    pub fn str(s: impl Into<String>) -> Self {
        ArgValue::Str(s.into())
    }

    pub fn var(name: impl Into<String>) -> Self {
        ArgValue::Ref(name.into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub module: String,
    /// Source order is kept so printing is canonical.
    pub args: Vec<(String, ArgValue)>,
    pub output: String,
}

impl Block {
    pub fn new(output: impl Into<String>, module: impl Into<String>) -> Self {
        Block { module: module.into(), args: Vec::new(), output: output.into() }
    }

    pub fn arg(mut self, name: impl Into<String>, value: ArgValue) -> Self {
        self.args.push((name.into(), value));
        self
    }

    pub fn get(&self, name: &str) -> Option<&ArgValue> {
        self.args.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn refs(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|(_, v)| match v {
            ArgValue::Ref(r) => Some(r.as_str()),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisualProgram {
    pub blocks: Vec<Block>,
}

impl VisualProgram {
    pub fn new(blocks: Vec<Block>) -> Self {
        VisualProgram { blocks }
    }

    pub fn block(&self, output: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.output == output)
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Canonical text form: one block per line, `out = Module(a="x", b=1, c=$v)`.
pub fn print_program(p: &VisualProgram) -> String {
    let mut out = String::new();
    for b in &p.blocks {
        let args: Vec<String> = b
            .args
            .iter()
            .map(|(n, v)| match v {
                ArgValue::Str(s) => format!("{n}={}", quote(s)),
                ArgValue::Num(x) => format!("{n}={x}"),
                ArgValue::Ref(r) => format!("{n}=${r}"),
            })
            .collect();
        let _ = writeln!(out, "{} = {}({})", b.output, b.module, args.join(", "));
    }
    out
}
