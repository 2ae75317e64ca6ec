//! The oracles check each other: evaluation preserves the checker's type,
//! and proof search only returns derivations the engine accepts.

use deriver_core::document::{DerivationDoc, Feedback};
use deriver_core::rules::builtin_system;
use deriver_core::verifier::{verify_document, TreeStatus};
use deriver_testkit::alfa::{eval, random_closed_term, typecheck};
use deriver_testkit::nd::{height, prove, Prop};
use rand::rngs::StdRng;
use rand::SeedableRng;

#[test]
fn evaluation_preserves_types() {
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..300 {
        let (e, ty) = random_closed_term(&mut rng, 5);
        let (v, _) = eval(&e).expect("well-typed terms do not get stuck");
        assert!(v.is_value(), "{v:?}");
        assert_eq!(typecheck(&[], &v).map(|(t, _)| t), Some(ty), "{e:?} => {v:?}");
    }
}

#[test]
fn proof_search_results_verify() {
    let (a, b, c) = (Prop::atom("A"), Prop::atom("B"), Prop::atom("C"));
    let sequents = [
        (vec![Prop::and(a.clone(), b.clone())], Prop::and(b.clone(), a.clone())),
        (vec![], Prop::imp(a.clone(), Prop::imp(b.clone(), a.clone()))),
        (
            vec![Prop::or(a.clone(), b.clone()), Prop::imp(a.clone(), c.clone()), Prop::imp(b.clone(), c.clone())],
            c.clone(),
        ),
        (vec![a.clone(), Prop::not(a.clone())], c.clone()),
    ];
    for (ctx, goal) in sequents {
        let tree = prove(&ctx, &goal, 6).unwrap_or_else(|| panic!("{goal:?} not found"));
        assert!(height(&tree) <= 6);
        let doc = DerivationDoc::from_parts(builtin_system("prop-nd").unwrap(), Feedback::Full, vec![], vec![], tree)
            .unwrap();
        assert_eq!(verify_document(&doc).tree_status, TreeStatus::CompleteCorrect, "{goal:?}");
    }
    assert!(prove(&[], &a, 6).is_none());
}
