#[path = "../examples/build_fixtures.rs"]
#[allow(dead_code)]
mod build;

use forge_core::domain::{HyperParams, Language, UserPrompt};
use forge_core::gateway::{BackendConfig, Gateway, OnMiss};
use forge_core::pipeline::extend_prompt;

#[test]
fn fixtures_match_generator() {
    for (name, content) in build::all() {
        let on_disk = std::fs::read_to_string(build::dir().join(name)).unwrap();
        assert_eq!(on_disk, content, "{name} is stale; rerun the build_fixtures example");
    }
}

#[test]
fn world_peace_extension_replays() {
    let gw = Gateway::from_config(&BackendConfig::replay(
        build::dir().join("extend_world_peace.jsonl"),
        OnMiss::Error,
    ))
    .unwrap();
    let user = UserPrompt::new(build::WORLD_PEACE_PROMPT, Language::En).unwrap();
    let mut params = HyperParams::default();
    params.pipeline.fallback_enabled = false;
    let ext = extend_prompt(&user, &params, &gw).unwrap();
    assert_eq!(ext.glyph_prompt, "World Peace");
    assert_eq!(ext.texture_prompt, "Sun, Peace Dove, leaves, cloud");
    assert_eq!(ext.semantic_concept, None);
}
