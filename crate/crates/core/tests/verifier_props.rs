use std::collections::BTreeSet;

use deriver_core::document::{DerivationDoc, Feedback};
use deriver_core::rules::builtin_system;
use deriver_core::verifier::{apply_and_verify, verify_document, NodeStatus, TreeStatus};
use deriver_testkit::alfa::{eval, random_closed_term, typecheck};
use deriver_testkit::gen::{random_edit, DocGen};
use deriver_testkit::mutate::{mutate, punch_hole, Mutation};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// A correct oracle derivation (typing or evaluation) of a random term.
fn oracle_doc(rng: &mut StdRng) -> DerivationDoc {
    let (e, _) = random_closed_term(rng, 5);
    let (system, tree) = if rng.gen_bool(0.5) {
        ("alfa-typing", typecheck(&[], &e).unwrap().1)
    } else {
        ("alfa-eval", eval(&e).unwrap().1)
    };
    DerivationDoc::from_parts(builtin_system(system).unwrap(), Feedback::Full, vec![], vec![], tree)
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn holes_never_make_a_node_incorrect(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let doc = oracle_doc(&mut rng);
        prop_assert_eq!(verify_document(&doc).tree_status, TreeStatus::CompleteCorrect);
        let Some((holed, node, path)) = punch_hole(&mut rng, &doc) else {
            return Ok(());
        };
        let r = verify_document(&holed);
        for (id, res) in &r.nodes {
            prop_assert!(
                !res.status.is_incorrect(),
                "{id} after hole at {node} {path}: {:?}",
                res.status.errors()
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn incremental_verification_equals_batch(seed in any::<u64>(), steps in 1usize..4) {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut doc = if rng.gen_bool(0.5) {
            DocGen::default().document(&mut rng)
        } else {
            oracle_doc(&mut rng)
        };
        let mut report = verify_document(&doc);
        for _ in 0..steps {
            let cmd = random_edit(&mut rng, &doc);
            let Ok(update) = apply_and_verify(&doc, &report, &cmd) else {
                continue;
            };
            let batch = verify_document(&update.doc);
            prop_assert_eq!(&update.report, &batch, "after {:?}", cmd);
            // locality: nothing outside the affected set changed status
            for (id, res) in &batch.nodes {
                if !update.affected.contains(id) {
                    prop_assert_eq!(Some(&res.status), report.status(*id));
                }
            }
            doc = update.doc;
            report = update.report;
        }
    }

    #[test]
    fn single_mutations_are_caught_where_they_happen(seed in any::<u64>(), kind in 0usize..3) {
        let mut rng = StdRng::seed_from_u64(seed);
        let doc = oracle_doc(&mut rng);
        let kind = [Mutation::WrongRule, Mutation::ChangedType, Mutation::ChangedLiteral][kind];
        let Some((bad, node)) = mutate(&mut rng, &doc, kind) else {
            return Ok(());
        };
        let r = verify_document(&bad);
        prop_assert_eq!(r.tree_status, TreeStatus::HasErrors);
        let allowed: BTreeSet<_> = std::iter::once(node).chain(bad.parent_of(node)).collect();
        for e in r.errors() {
            prop_assert!(allowed.contains(&e.node), "{:?} at {} not in {:?}", kind, e.node, allowed);
        }
    }
}

#[test]
fn silent_documents_still_compute_full_statuses() {
    let mut rng = StdRng::seed_from_u64(1);
    let doc = oracle_doc(&mut rng);
    let (mut bad, _) = mutate(&mut rng, &doc, Mutation::WrongRule).unwrap();
    bad.feedback = Feedback::Silent;
    let r = verify_document(&bad);
    assert_eq!(r.tree_status, TreeStatus::HasErrors);
    assert!(r.nodes.values().any(|n| matches!(n.status, NodeStatus::Incorrect(_))));
}

