//! Regenerates the replay fixtures under `fixtures/`.
//!
//! Fixture keys hash the fully rendered prompt, so any template or model
//! tree edit must be followed by `cargo run -p forge-core --example build_fixtures`.

use std::path::PathBuf;

use forge_core::domain::{Language, UserPrompt};
use forge_core::gateway::replay::FixtureRecord;
use forge_core::pipeline::extend_request;
use forge_core::texture::{judge_request, selection_request, CategoryNode, ModelTree, PathwayStep};

pub const CHURCH_PROMPT: &str = "A girl, a boy, in a church";

pub const FUTURE_TECH_PROMPTS: [&str; 5] = [
    "cybernetic cityscape, holographic interface, neon circuits, quantum particles",
    "robotic augmentation, bioluminescent tech, neural networks visualization",
    "quantum computing visualization, data crystals, energy flows",
    "cyborg nature fusion, techno-organic growth, synthetic biology",
    "artificial intelligence mindscape, digital consciousness, virtual reality portals",
];

pub const WORLD_PEACE_PROMPT: &str = "Create a stylish word 'World Peace' representing its meaning";

pub const CLOSED_LOOP_PROMPT: &str = "Birthday card 'Happy Birthday': old man, cake, candles, little girl";

fn names(node: &CategoryNode) -> Vec<String> {
    if node.leaves.is_empty() {
        node.children.iter().map(|c| c.name.clone()).collect()
    } else {
        node.leaves.iter().map(|l| l.name().to_string()).collect()
    }
}

fn jsonl(records: &[FixtureRecord]) -> String {
    records.iter().map(|r| serde_json::to_string(r).unwrap() + "\n").collect()
}

fn answer(why: &str, selected: &str) -> String {
    format!("Summarization: {why}\nSelected: {selected}")
}

/// Walks `path` (category names, then the leaf) and records one selection
/// answer per level. Returns the records and the steps they produce.
fn walk(tree: &ModelTree, prompt: &str, path: &[(&str, &str)]) -> (Vec<FixtureRecord>, Vec<PathwayStep>) {
    let mut node = &tree.root;
    let mut records = Vec::new();
    let mut steps = Vec::new();
    for (i, (selected, why)) in path.iter().enumerate() {
        let candidates = names(node);
        let response = answer(why, selected);
        records.push(FixtureRecord::for_prompt(
            &selection_request(prompt, &candidates),
            response.clone(),
            Some(format!("level {}", i + 1)),
        ));
        let canonical = candidates.iter().find(|c| c.eq_ignore_ascii_case(selected)).expect("path follows the tree");
        steps.push(PathwayStep { candidates: candidates.clone(), selected: canonical.clone(), rationale: response });
        if let Some(child) = node.child(canonical) {
            node = child;
        }
    }
    (records, steps)
}

pub fn church(tree: &ModelTree) -> String {
    let (records, _) = walk(
        tree,
        CHURCH_PROMPT,
        &[
            ("Traditional Art", "the church setting points to a classical treatment."),
            ("European style", "a church suggests a Western setting."),
            ("Painting", "the quiet scene fits a painted rendering better than engraving."),
            ("Oil Painting", "broad enough for the scene without tying it to one artist."),
        ],
    );
    jsonl(&records)
}

pub fn future_tech(tree: &ModelTree) -> String {
    let scifi = tree.root.child("SCI-FI").expect("bundled tree has SCI-FI");
    let mut records = Vec::new();
    for prompt in FUTURE_TECH_PROMPTS {
        let (walk_records, steps) = walk(
            tree,
            prompt,
            &[("SCI-FI", "the prompt is about future technology."), ("Cyber", "neon, circuits and networks read as cyber.")],
        );
        records.extend(walk_records);
        for step in &steps {
            for leaf in &scifi.leaves {
                let scores = if leaf.id == "sci-fi/cyber" { "9 8 9" } else { "6 7 5" };
                records.push(FixtureRecord::for_prompt(&judge_request(step, leaf), scores, Some(leaf.id.clone())));
            }
        }
    }
    jsonl(&records)
}

pub fn world_peace() -> String {
    let user = UserPrompt::new(WORLD_PEACE_PROMPT, Language::En).unwrap();
    jsonl(&[FixtureRecord::for_prompt(
        &extend_request(&user).unwrap(),
        "Glyph: World Peace\nTexture: Sun, Peace Dove, leaves, cloud\nSemantic: none",
        Some("extension".into()),
    )])
}

pub fn closed_loop() -> String {
    use forge_core::gateway::{render_template, TemplateId};
    let user = UserPrompt::new(CLOSED_LOOP_PROMPT, Language::En).unwrap();
    let targets = render_template(
        TemplateId::TargetExtract,
        &[("input".to_string(), CLOSED_LOOP_PROMPT.to_string())].into_iter().collect(),
    )
    .unwrap();
    jsonl(&[
        FixtureRecord::for_prompt(
            &extend_request(&user).unwrap(),
            "Glyph: Happy Birthday\nTexture: warm birthday party, old man, cake\nSemantic: none",
            Some("extension drops two targets".into()),
        ),
        FixtureRecord::for_prompt(&targets, "Targets:{old man, cake, candles, little girl}", Some("targets".into())),
    ])
}

pub fn all() -> Vec<(&'static str, String)> {
    let tree = ModelTree::bundled().expect("bundled tree loads");
    vec![
        ("tot_church.jsonl", church(&tree)),
        ("tot_future_tech.jsonl", future_tech(&tree)),
        ("extend_world_peace.jsonl", world_peace()),
        ("closed_loop.jsonl", closed_loop()),
    ]
}

pub fn dir() -> PathBuf {
    forge_core::bundled_dir().join("fixtures")
}

#[allow(dead_code)]
fn main() {
    std::fs::create_dir_all(dir()).unwrap();
    for (name, body) in all() {
        std::fs::write(dir().join(name), body).unwrap();
        println!("wrote fixtures/{name}");
    }
}
