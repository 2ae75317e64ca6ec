use std::sync::Arc;

use deriver_core::document::{EditCommand, Feedback};
use deriver_core::textio::{print_document, WireEdit};
use deriver_service::{SessionStore, Source};
use deriver_testkit::gen::{random_edit, DocGen};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn applying_deltas_reproduces_the_full_state(seed in any::<u64>(), steps in 1usize..8) {
        let mut rng = StdRng::seed_from_u64(seed);
        let store = SessionStore::new();
        let text = print_document(&DocGen::default().document(&mut rng));
        let (id, mut client) = store.create(Source::Text(&text)).unwrap();
        for _ in 0..steps {
            let delta = match rng.gen_range(0..10) {
                0 => store.undo(&id),
                1 => store.redo(&id),
                2 => {
                    let feedback = if rng.gen_bool(0.5) { Feedback::Silent } else { Feedback::Full };
                    store.post_command(&id, &EditCommand::SetFeedback { feedback })
                }
                _ => {
                    let doc = store.snapshot(&id).unwrap().doc.clone();
                    store.post_command(&id, &random_edit(&mut rng, &doc))
                }
            };
            if let Ok(delta) = delta {
                client.apply(&delta);
            }
            let server = store.state(&id).unwrap();
            prop_assert_eq!(&client.nodes, &server.nodes);
            prop_assert_eq!(&client.outline, &server.outline);
            prop_assert_eq!((client.can_undo, client.can_redo), (server.can_undo, server.can_redo));
        }
    }

    #[test]
    fn silent_sessions_never_leak_details(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut doc = DocGen::default().document(&mut rng);
        doc.feedback = Feedback::Silent;
        let store = SessionStore::new();
        let (id, state) = store.create(Source::Text(&print_document(&doc))).unwrap();
        let mut payloads = vec![serde_json::to_value(&state).unwrap()];
        for _ in 0..4 {
            let doc = store.snapshot(&id).unwrap().doc.clone();
            let cmd = random_edit(&mut rng, &doc);
            if matches!(cmd, EditCommand::SetFeedback { .. }) {
                continue;
            }
            if let Ok(d) = store.post_command(&id, &cmd) {
                payloads.push(serde_json::to_value(&d).unwrap());
            }
        }
        for p in payloads {
            let text = p.to_string();
            prop_assert!(!text.contains("\"incorrect\"") && !text.contains("\"expected\""), "{}", text);
            prop_assert!(!text.contains("HasErrors"), "{}", text);
        }
    }
}

#[test]
fn concurrent_edits_on_one_session_serialize() {
    let store = Arc::new(SessionStore::new());
    let (id, state) = store.create(Source::System("alfa-eval")).unwrap();
    let root = state.outline.root.clone();
    let threads: Vec<_> = (0..8)
        .map(|_| {
            let (store, id, root) = (store.clone(), id.clone(), root.clone());
            std::thread::spawn(move || {
                for _ in 0..25 {
                    store
                        .post_edit(&id, &WireEdit::AddPremise { node: root.clone(), position: None })
                        .unwrap();
                }
            })
        })
        .collect();
    for t in threads {
        t.join().unwrap();
    }
    let state = store.state(&id).unwrap();
    assert_eq!(state.nodes[&root].children.len(), 200);
    // every edit got its own undo step
    for _ in 0..200 {
        store.undo(&id).unwrap();
    }
    assert_eq!(store.undo(&id).unwrap_err().code(), "NothingToUndo");
    assert_eq!(store.state(&id).unwrap().nodes.len(), 1);
}
