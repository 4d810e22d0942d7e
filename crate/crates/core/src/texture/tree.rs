//! Hierarchical LoRA model library.
//!
//! File format, one leaf per line:
//! `category/sub/.../leaf|trigger, words|default_alpha|base_model`.
//! Blank lines and lines starting with `#` are ignored. Categories are
//! created implicitly in first-seen order.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TextureError;

/// Maximum number of path segments, leaf included.
pub const MAX_DEPTH: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoraModel {
    pub id: String,
    /// Category names root to leaf; the last entry is the leaf name.
    pub path: Vec<String>,
    pub trigger_words: Vec<String>,
    pub default_alpha: f64,
    pub base_model: String,
}

impl LoraModel {
    pub fn name(&self) -> &str {
        self.path.last().map(String::as_str).unwrap_or("")
    }

    pub fn categories(&self) -> &[String] {
        &self.path[..self.path.len().saturating_sub(1)]
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CategoryNode {
    pub name: String,
    pub children: Vec<CategoryNode>,
    pub leaves: Vec<LoraModel>,
}

impl CategoryNode {
    pub fn child(&self, name: &str) -> Option<&CategoryNode> {
        self.children.iter().find(|c| c.name == name)
    }

    /// Every leaf below this node, depth first in file order.
    pub fn all_leaves(&self) -> Vec<&LoraModel> {
        let mut out: Vec<&LoraModel> = self.leaves.iter().collect();
        for c in &self.children {
            out.extend(c.all_leaves());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelTree {
    pub root: CategoryNode,
}

/// Leaf ids are the lowercased path with whitespace runs turned into `-`.
pub fn leaf_id(path: &[String]) -> String {
    path.iter()
        .map(|s| s.split_whitespace().collect::<Vec<_>>().join("-").to_lowercase())
        .collect::<Vec<_>>()
        .join("/")
}

impl ModelTree {
    pub fn leaves(&self) -> Vec<&LoraModel> {
        self.root.all_leaves()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().len()
    }

    pub fn find(&self, id: &str) -> Option<&LoraModel> {
        self.leaves().into_iter().find(|m| m.id == id)
    }

    /// Node reached by following category names from the root.
    pub fn node(&self, categories: &[String]) -> Option<&CategoryNode> {
        let mut node = &self.root;
        for name in categories {
            node = node.child(name)?;
        }
        Some(node)
    }

    /// Longest root-to-leaf path, counted in segments including the leaf.
    pub fn depth(&self) -> usize {
        self.leaves().iter().map(|m| m.path.len()).max().unwrap_or(0)
    }

    pub fn top_level(&self) -> Vec<&str> {
        self.root.children.iter().map(|c| c.name.as_str()).collect()
    }

    /// Builds a tree from models in order, checking every invariant.
    pub fn from_models(models: Vec<LoraModel>) -> Result<ModelTree, TextureError> {
        let mut root = CategoryNode { name: String::new(), ..Default::default() };
        let mut ids = BTreeSet::new();
        for (i, m) in models.into_iter().enumerate() {
            insert(&mut root, m, i + 1, &mut ids)?;
        }
        let tree = ModelTree { root };
        if tree.leaf_count() == 0 {
            return Err(TextureError::EmptyTree);
        }
        Ok(tree)
    }
}

fn insert(root: &mut CategoryNode, m: LoraModel, line: usize, ids: &mut BTreeSet<String>) -> Result<(), TextureError> {
    let perr = |message: String| TextureError::ParseError { line, message };
    if m.path.is_empty() || m.path.iter().any(|s| s.trim().is_empty()) {
        return Err(perr("empty path segment".into()));
    }
    if m.path.len() > MAX_DEPTH {
        return Err(perr(format!("path has {} segments, at most {MAX_DEPTH} allowed", m.path.len())));
    }
    if !(m.default_alpha > 0.0 && m.default_alpha <= 1.0) {
        return Err(perr(format!("default alpha {} outside (0, 1]", m.default_alpha)));
    }
    if m.base_model.trim().is_empty() {
        return Err(perr("empty base model".into()));
    }
    if !ids.insert(m.id.clone()) {
        return Err(TextureError::DuplicateLeafId { line, id: m.id });
    }
    let mut node = root;
    for name in m.categories() {
        if node.leaves.iter().any(|l| l.name() == name) {
            return Err(perr(format!("`{name}` is both a leaf and a category")));
        }
        let idx = match node.children.iter().position(|c| &c.name == name) {
            Some(i) => i,
            None => {
                node.children.push(CategoryNode { name: name.clone(), ..Default::default() });
                node.children.len() - 1
            }
        };
        node = &mut node.children[idx];
    }
    if node.children.iter().any(|c| c.name == m.name()) || node.leaves.iter().any(|l| l.name() == m.name()) {
        return Err(perr(format!("sibling name `{}` is not unique", m.name())));
    }
    node.leaves.push(m);
    Ok(())
}

fn parse_line(line: &str, n: usize) -> Result<LoraModel, TextureError> {
    let perr = |message: String| TextureError::ParseError { line: n, message };
    let fields: Vec<&str> = line.split('|').collect();
    if fields.len() != 4 {
        return Err(perr(format!("expected 4 `|`-separated fields, found {}", fields.len())));
    }
    let path: Vec<String> = fields[0].split('/').map(|s| s.trim().to_string()).collect();
    let trigger_words: Vec<String> =
        fields[1].split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
    let default_alpha: f64 = fields[2].trim().parse().map_err(|_| perr(format!("bad alpha `{}`", fields[2].trim())))?;
    Ok(LoraModel {
        id: leaf_id(&path),
        path,
        trigger_words,
        default_alpha,
        base_model: fields[3].trim().to_string(),
    })
}

pub fn parse_tree(text: &str) -> Result<ModelTree, TextureError> {
    let mut root = CategoryNode::default();
    let mut ids = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let m = parse_line(line, i + 1)?;
        insert(&mut root, m, i + 1, &mut ids)?;
    }
    let tree = ModelTree { root };
    if tree.leaf_count() == 0 {
        return Err(TextureError::EmptyTree);
    }
    Ok(tree)
}

pub fn load_tree(path: &Path) -> Result<ModelTree, TextureError> {
    let text = std::fs::read_to_string(path).map_err(|e| TextureError::Io(format!("{}: {e}", path.display())))?;
    parse_tree(&text)
}

impl ModelTree {
    pub fn bundled() -> Result<ModelTree, TextureError> {
        load_tree(&crate::bundled_dir().join("data/model_tree.txt"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_leaf() {
        let t = parse_tree("sci-fi/cyber|neon, circuit|0.8|base-v15").unwrap();
        assert_eq!(t.top_level(), vec!["sci-fi"]);
        let m = t.find("sci-fi/cyber").unwrap();
        assert_eq!(m.trigger_words, vec!["neon", "circuit"]);
        assert_eq!(m.base_model, "base-v15");
    }

    #[test]
    fn bundled_reference_tree() {
        let t = ModelTree::bundled().unwrap();
        assert_eq!(t.leaf_count(), 68);
        for name in ["General", "Realistic", "SCI-FI", "Art", "Design", "Cartoon", "Traditional Art"] {
            assert!(t.top_level().contains(&name), "{name}");
        }
        assert_eq!(t.depth(), 4);
        assert!(t.find("traditional-art/european-style/painting/oil-painting").is_some());
    }

    #[test]
    fn duplicate_leaf() {
        let err = parse_tree("a/b|x|1|m\n# c\na/b|y|0.5|m\n").unwrap_err();
        assert_eq!(err, TextureError::DuplicateLeafId { line: 3, id: "a/b".into() });
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert!(matches!(parse_tree("a/b|x|1|m\na/c|x|1.5|m"), Err(TextureError::ParseError { line: 2, .. })));
        assert!(matches!(parse_tree("\n\na|x|1"), Err(TextureError::ParseError { line: 3, .. })));
        assert!(matches!(parse_tree("a/b/c/d/e|x|1|m"), Err(TextureError::ParseError { line: 1, .. })));
        assert!(matches!(parse_tree("a/b|x|1|m\na|x|1|m"), Err(TextureError::ParseError { line: 2, .. })));
        assert_eq!(parse_tree("# nothing\n"), Err(TextureError::EmptyTree));
    }

    #[test]
    fn categories_keep_first_seen_order() {
        let t = parse_tree("b/x|t|1|m\na/y|t|1|m\nb/z|t|1|m").unwrap();
        assert_eq!(t.top_level(), vec!["b", "a"]);
        assert_eq!(t.root.children[0].leaves.len(), 2);
    }
}
