use proptest::prelude::*;
use serde_json::json;

use forge_core::qa::UserAnswers;
use forge_service::{NewSession, Orchestrator, Runtime, ServiceConfig, ServiceError, Session, Status};

#[derive(Debug, Clone)]
enum Op {
    Iterate,
    Feedback(f64),
    BadFeedback,
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        3 => Just(Op::Iterate),
        2 => (0.0f64..=1.0).prop_map(Op::Feedback),
        1 => Just(Op::BadFeedback),
    ]
}

fn snapshot(o: &Orchestrator, id: &str) -> Session {
    o.get(id).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn random_operation_sequences(
        ops in prop::collection::vec(op(), 1..10),
        tau in 1u32..4,
        interactive in any::<bool>(),
        auto_continue in any::<bool>(),
    ) {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ServiceConfig { data_dir: dir.path().to_path_buf(), auto_continue, ..Default::default() };
        let o = Orchestrator::new(Runtime::new(cfg).unwrap());
        let id = o
            .create(NewSession {
                prompt: "Write 'SALE' in neon".into(),
                interactive: Some(interactive),
                params: Some(json!({"qa": {"tau": tau, "theta": 1.0}})),
                ..Default::default()
            })
            .unwrap()
            .id;
        let mut before = snapshot(&o, &id);
        for op in ops {
            let r = match op {
                Op::Iterate => o.iterate(&id).map(|_| ()),
                Op::Feedback(q) => o.submit_feedback(&id, UserAnswers { g_qua: Some(q), ..Default::default() }).map(|_| ()),
                Op::BadFeedback => o.submit_feedback(&id, UserAnswers { g_cos: Some(-1.0), ..Default::default() }).map(|_| ()),
            };
            let after = snapshot(&o, &id);
            match r {
                Err(e) => {
                    prop_assert!(matches!(e, ServiceError::WrongState { .. } | ServiceError::InvalidInput(_)), "{e}");
                    prop_assert_eq!(&after, &before);
                }
                Ok(()) => {
                    prop_assert!(after.history.starts_with(&before.history));
                    if before.status != after.status {
                        prop_assert!(
                            matches!(
                                (before.status, after.status),
                                (Status::Created | Status::AwaitingFeedback, _) | (Status::Running, _)
                            )
                        );
                    }
                }
            }
            for (i, r) in after.history.iter().enumerate() {
                prop_assert_eq!(r.index as usize, i);
            }
            prop_assert!(after.history.len() as u32 <= tau);
            if !interactive {
                prop_assert!(matches!(after.status, Status::Created | Status::Done | Status::Failed));
            }
            before = after;
        }
    }
}

#[test]
fn logged_statuses_follow_the_transition_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = Orchestrator::new(Runtime::new(ServiceConfig { data_dir: dir.path().to_path_buf(), ..Default::default() }).unwrap());
    let id = o
        .create(NewSession {
            prompt: "hello".into(),
            interactive: Some(true),
            params: Some(json!({"qa": {"tau": 3, "theta": 1.0}})),
            ..Default::default()
        })
        .unwrap()
        .id;
    while !o.get(&id).unwrap().status.is_terminal() {
        o.iterate(&id).unwrap();
        if o.get(&id).unwrap().status == Status::AwaitingFeedback {
            o.submit_feedback(&id, UserAnswers::default()).unwrap();
        }
    }
    let text = std::fs::read_to_string(dir.path().join("sessions").join(format!("{id}.jsonl"))).unwrap();
    let statuses: Vec<Status> = forge_service::store::parse_log(&text)
        .unwrap()
        .into_iter()
        .filter_map(|e| match e {
            forge_service::store::Event::Status { status } => Some(status),
            _ => None,
        })
        .collect();
    let mut prev = Status::Created;
    for s in &statuses {
        assert!(prev.can_move_to(*s), "{prev} -> {s}");
        prev = *s;
    }
    assert_eq!(prev, Status::Done);
}
