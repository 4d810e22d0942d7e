use serde_json::json;

use forge_core::artifact::ArtifactStore;
use forge_core::domain::StyleKind;
use forge_core::gateway::{BackendConfig, BackendMode};
use forge_core::qa::UserAnswers;
use forge_service::{NewSession, Orchestrator, Runtime, ServiceConfig, ServiceError, Status};

fn orchestrator(dir: &std::path::Path) -> Orchestrator {
    Orchestrator::new(Runtime::new(ServiceConfig { data_dir: dir.to_path_buf(), ..Default::default() }).unwrap())
}

fn new(o: &Orchestrator, prompt: &str, interactive: bool, params: serde_json::Value) -> String {
    o.create(NewSession { prompt: prompt.into(), interactive: Some(interactive), params: Some(params), ..Default::default() })
        .unwrap()
        .id
}

#[test]
fn interactive_lifecycle_with_preference_pin() {
    let dir = tempfile::tempdir().unwrap();
    let o = orchestrator(dir.path());
    let id = new(&o, "Write 'SALE' in neon", true, json!({"qa": {"tau": 3, "theta": 1.0}}));
    assert_eq!(o.get(&id).unwrap().status, Status::Created);
    assert!(matches!(o.submit_feedback(&id, UserAnswers::default()), Err(ServiceError::WrongState { .. })));

    let first = o.iterate(&id).unwrap();
    assert_eq!(first.records.len(), 1);
    assert_eq!(first.session.status, Status::AwaitingFeedback);

    let mut answers = UserAnswers { g_cos: Some(0.2), ..Default::default() };
    answers.g_pref.insert("style".into(), "Cartoon".into());
    o.submit_feedback(&id, answers).unwrap();
    assert_eq!(o.get(&id).unwrap().pending.len(), 1);

    let second = o.iterate(&id).unwrap();
    let rec = &second.records[0];
    assert_eq!(rec.index, 1);
    assert_eq!(rec.params_snapshot.texture.forced_path.as_deref(), Some(&["Cartoon".to_string()][..]));
    let store = ArtifactStore::new(dir.path().join("artifacts"));
    let meta = store.read_metadata(rec.artifact_ref.as_ref().unwrap()).unwrap();
    assert!(meta.request.fusion.iter().all(|(m, _)| m.starts_with("cartoon/")), "{:?}", meta.request.fusion);
    assert!(second.session.pending.is_empty());

    let third = o.iterate(&id).unwrap();
    assert_eq!(third.session.status, Status::Done);
    assert_eq!(third.session.history.len(), 3);
    assert!(matches!(o.iterate(&id), Err(ServiceError::WrongState { .. })));
}

#[test]
fn autonomous_session_spends_budget_in_one_call() {
    let dir = tempfile::tempdir().unwrap();
    let o = orchestrator(dir.path());
    let id = new(&o, "Birthday card 'Happy Birthday': old man, cake", false, json!({"qa": {"tau": 2, "theta": 1.0}}));
    let out = o.iterate(&id).unwrap();
    assert_eq!(out.records.len(), 2);
    assert_eq!(out.traces.len(), 2);
    assert_eq!(out.traces[0].iter().map(|t| t.module.as_str()).collect::<Vec<_>>(), [
        "ExtendPrompt",
        "GlyphGen",
        "ToTSelect",
        "TexRender",
        "Evaluate"
    ]);
    assert_eq!(out.session.status, Status::Done);
    let s = o.get(&id).unwrap();
    assert_eq!(s.history, out.session.history);
    assert!(s.best().is_some());
}

#[test]
fn style_is_pinned_after_first_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let o = orchestrator(dir.path());
    let id = new(
        &o,
        "funny dragon letters 'Hi'",
        true,
        json!({"qa": {"tau": 2, "theta": 1.0}, "glyph": {"max_iterations": 2}}),
    );
    let out = o.iterate(&id).unwrap();
    assert_eq!(out.traces[0][1].module, "SemanticDeform");
    assert_eq!(out.session.params.glyph.style_kind, Some(StyleKind::Semantic));
    let g = out.records[0].feedback.as_ref().unwrap().g_gly.unwrap();
    assert!((0.0..=1.0).contains(&g));
}

#[test]
fn every_pass_failing_ends_in_failed() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ServiceConfig { data_dir: dir.path().to_path_buf(), ..Default::default() };
    cfg.gateway = BackendConfig { mode: BackendMode::Disabled, ..BackendConfig::mock(None) };
    let o = Orchestrator::new(Runtime::new(cfg).unwrap());
    let id = new(&o, "hello", false, json!({"qa": {"tau": 2}}));
    let out = o.iterate(&id).unwrap();
    assert_eq!(out.records.len(), 2);
    assert!(out.records.iter().all(|r| r.error.is_some() && r.score.is_none()));
    assert_eq!(out.session.status, Status::Failed);
}

#[test]
fn state_survives_restart() {
    let dir = tempfile::tempdir().unwrap();
    let id = {
        let o = orchestrator(dir.path());
        let id = new(&o, "Write 'SALE' in neon", true, json!({"qa": {"tau": 3, "theta": 1.0}}));
        o.iterate(&id).unwrap();
        o.submit_feedback(&id, UserAnswers { g_qua: Some(0.1), ..Default::default() }).unwrap();
        id
    };
    let o = orchestrator(dir.path());
    let s = o.get(&id).unwrap();
    assert_eq!(s.status, Status::AwaitingFeedback);
    assert_eq!(s.history.len(), 1);
    assert_eq!(s.pending.len(), 1);
    assert_eq!(o.list().unwrap(), vec![id]);
}

#[test]
fn export_import_round_trip() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let src = orchestrator(a.path());
    let id = new(&src, "Write 'SALE' in neon", false, json!({"qa": {"tau": 2, "theta": 1.0}}));
    src.iterate(&id).unwrap();
    let bundle = a.path().join("bundle");
    let manifest = src.export(&id, &bundle).unwrap();
    assert!(!manifest.artifacts.is_empty());

    let dst = orchestrator(b.path());
    let imported = dst.import(&bundle).unwrap();
    assert_eq!(imported.history, src.get(&id).unwrap().history);
    let r = &manifest.artifacts[0];
    assert_eq!(dst.artifact(&id, r).unwrap(), src.artifact(&id, r).unwrap());
    assert!(matches!(dst.import(&bundle), Err(ServiceError::AlreadyExists(_))));

    std::fs::write(bundle.join("session.jsonl"), "tampered").unwrap();
    let c = tempfile::tempdir().unwrap();
    assert!(matches!(orchestrator(c.path()).import(&bundle), Err(ServiceError::InvalidInput(_))));
}

#[test]
fn artifacts_are_scoped_to_their_session() {
    let dir = tempfile::tempdir().unwrap();
    let o = orchestrator(dir.path());
    let a = new(&o, "Write 'SALE' in neon", false, json!({"qa": {"tau": 1}}));
    let b = new(&o, "Write 'SALE' in neon", false, json!({"qa": {"tau": 1}}));
    let r = o.iterate(&a).unwrap().records[0].artifact_ref.clone().unwrap();
    assert!(o.artifact(&a, &r.0).unwrap().starts_with(b"\x89PNG"));
    assert!(matches!(o.artifact(&b, &r.0), Err(ServiceError::ArtifactNotFound(_))));
    assert!(matches!(o.artifact(&a, "../x"), Err(ServiceError::ArtifactNotFound(_))));
}

#[test]
fn questions_follow_the_fixed_schema() {
    let dir = tempfile::tempdir().unwrap();
    let o = orchestrator(dir.path());
    let id = new(&o, "Write 'SALE' in neon", true, json!({}));
    let before = o.questions(&id).unwrap();
    o.iterate(&id).unwrap();
    let after = o.questions(&id).unwrap();
    let fields = |qs: &[forge_core::qa::Question]| qs.iter().map(|q| q.field.clone()).collect::<Vec<_>>();
    assert_eq!(fields(&before), ["g_cos", "g_qua", "g_gly", "g_pref"]);
    assert_eq!(fields(&after), fields(&before));
}

#[test]
fn invalid_requests_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = orchestrator(dir.path());
    let bad = |p: serde_json::Value| {
        o.create(NewSession { prompt: "x".into(), params: Some(p), ..Default::default() })
    };
    assert!(matches!(bad(json!({"qa": {"tau": 0}})), Err(ServiceError::InvalidInput(_))));
    assert!(matches!(bad(json!({"qa": {"theta": 2.0}})), Err(ServiceError::InvalidInput(_))));
    assert!(matches!(
        o.create(NewSession { prompt: "   ".into(), ..Default::default() }),
        Err(ServiceError::InvalidInput(_))
    ));
    assert!(matches!(o.get("abcdef"), Err(ServiceError::NotFound(_))));
    let id = new(&o, "hi", true, json!({"qa": {"theta": 1.0}}));
    o.iterate(&id).unwrap();
    let r = o.submit_feedback(&id, UserAnswers { g_cos: Some(1.5), ..Default::default() });
    assert!(matches!(r, Err(ServiceError::InvalidInput(_))));
}

#[test]
fn ids_are_distinct_and_empty_exports_have_no_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = orchestrator(dir.path());
    let a = new(&o, "hello", true, json!({}));
    let b = new(&o, "hello", true, json!({}));
    assert_ne!(a, b);
    assert_eq!(a.len(), 32);
    let m = o.export(&a, &dir.path().join("out")).unwrap();
    assert!(m.artifacts.is_empty());
}

#[test]
fn queued_answers_reach_the_next_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let o = orchestrator(dir.path());
    let id = new(&o, "Write 'SALE' in neon", true, json!({"qa": {"tau": 3, "theta": 1.0}}));
    let model = o.iterate(&id).unwrap().records[0].feedback.clone().unwrap();
    assert!(model.user_fields.is_empty());
    o.submit_feedback(&id, UserAnswers { g_qua: Some(0.3), ..Default::default() }).unwrap();
    let g = o.iterate(&id).unwrap().records[0].feedback.clone().unwrap();
    assert_eq!(g.g_qua, 0.3);
    o.submit_feedback(&id, UserAnswers::default()).unwrap();
    let g = o.iterate(&id).unwrap().records[0].feedback.clone().unwrap();
    assert!(g.user_fields.is_empty());
    assert_eq!(g.g_cos, model.g_cos);
}

#[test]
fn replaying_an_exported_mock_session_reproduces_artifacts() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let src = orchestrator(a.path());
    let id = new(&src, "Birthday card 'Happy Birthday': old man, cake", false, json!({"qa": {"tau": 2, "theta": 1.0}}));
    src.iterate(&id).unwrap();
    src.export(&id, &a.path().join("bundle")).unwrap();
    let dst = orchestrator(b.path());
    let imported = dst.import(&a.path().join("bundle")).unwrap();
    let rerun = new(&dst, &imported.prompt.text, false, json!({"qa": {"tau": 2, "theta": 1.0}}));
    let refs = |s: &forge_service::Session| s.history.iter().map(|r| r.artifact_ref.clone()).collect::<Vec<_>>();
    dst.iterate(&rerun).unwrap();
    assert_eq!(refs(&dst.get(&rerun).unwrap()), refs(&imported));
}

#[test]
fn auto_continue_runs_the_next_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ServiceConfig { data_dir: dir.path().to_path_buf(), auto_continue: true, ..Default::default() };
    let o = Orchestrator::new(Runtime::new(cfg).unwrap());
    let id = new(&o, "hello", true, json!({"qa": {"tau": 3, "theta": 1.0}}));
    o.iterate(&id).unwrap();
    let s = o.submit_feedback(&id, UserAnswers { g_cos: Some(0.4), ..Default::default() }).unwrap();
    assert_eq!(s.history.len(), 2);
    assert_eq!(s.status, Status::AwaitingFeedback);
}
