use deriver_core::document::DerivNode;
use deriver_core::rules::{builtin_system, instantiate, match_schema, Bindings, MatchResult, Rule};
use deriver_core::term::{eq3_judgment, replace_at, Judgment, JudgmentKind, Term, TriBool};
use deriver_core::document::RuleRef;
use deriver_testkit::alfa::{eval, random_closed_term, typecheck};
use deriver_testkit::gen::{hole_paths, TermGen};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

/// (rule, node judgment, child judgments) for every node of an oracle
/// derivation of a random term.
fn oracle_steps(seed: u64) -> Vec<(Rule, Judgment, Vec<Judgment>)> {
    let mut rng = StdRng::seed_from_u64(seed);
    let (e, _) = random_closed_term(&mut rng, 4);
    let mut out = Vec::new();
    let typing = builtin_system("alfa-typing").unwrap();
    let evals = builtin_system("alfa-eval").unwrap();
    let trees = [(typing, typecheck(&[], &e).unwrap().1), (evals, eval(&e).unwrap().1)];
    for (sys, tree) in trees {
        tree.walk(&mut |n: &DerivNode| {
            let RuleRef::Rule(r) = &n.rule else { return };
            let rule = sys.rule(r).unwrap().clone();
            let kids = n.children.iter().map(|c| c.judgment.clone()).collect();
            out.push((rule, n.judgment.clone(), kids));
        });
    }
    out
}

/// Matches the conclusion and then every premise, threading bindings.
fn match_rule(rule: &Rule, j: &Judgment, kids: &[Judgment]) -> Vec<MatchResult> {
    let mut results = vec![match_schema(&rule.conclusion, j, &Bindings::new())];
    let mut b = match &results[0] {
        MatchResult::Matched(b) => b.clone(),
        _ => return results,
    };
    for (p, k) in rule.premises.iter().zip(kids) {
        let r = match_schema(p, k, &b);
        if let MatchResult::Matched(nb) = &r {
            b = nb.clone();
        }
        results.push(r);
    }
    results
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn matched_bindings_reproduce_the_subject(seed in any::<u64>()) {
        for (rule, j, kids) in oracle_steps(seed) {
            let MatchResult::Matched(b) = match_schema(&rule.conclusion, &j, &Bindings::new()) else {
                return Err(TestCaseError::fail(format!("{} did not match {j}", rule.name)));
            };
            prop_assert_eq!(eq3_judgment(&instantiate(&rule.conclusion, &b), &j), TriBool::Yes);
            let mut b = b;
            for (p, k) in rule.premises.iter().zip(&kids) {
                let MatchResult::Matched(nb) = match_schema(p, k, &b) else {
                    return Err(TestCaseError::fail(format!("{} premise vs {k}", rule.name)));
                };
                prop_assert_eq!(eq3_judgment(&instantiate(p, &nb), k), TriBool::Yes);
                b = nb;
            }
        }
    }

    #[test]
    fn matching_is_deterministic(seed in any::<u64>(), kind in 0usize..3) {
        let mut rng = StdRng::seed_from_u64(seed);
        let kind = [JudgmentKind::Typing, JudgmentKind::Eval, JudgmentKind::Entail][kind];
        let sys = builtin_system(match kind {
            JudgmentKind::Typing => "alfa-typing",
            JudgmentKind::Eval => "alfa-eval",
            JudgmentKind::Entail => "prop-nd",
        }).unwrap();
        let g = TermGen::with_holes(kind == JudgmentKind::Entail, 0.1);
        let j = g.judgment(&mut rng, kind, 3);
        for rule in &sys.rules {
            let a = match_schema(&rule.conclusion, &j, &Bindings::new());
            let b = match_schema(&rule.conclusion, &j, &Bindings::new());
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn holes_never_create_mismatches(seed in any::<u64>(), pick in any::<prop::sample::Index>(), which in any::<prop::sample::Index>()) {
        let steps = oracle_steps(seed);
        let (rule, j, kids) = which.get(&steps).clone();
        // punch a hole either in the conclusion or in one premise
        let mut targets = vec![j.clone()];
        targets.extend(kids.iter().cloned());
        let t = pick.index(targets.len());
        let paths = hole_paths(&targets[t]);
        let p = &paths[pick.index(paths.len())];
        targets[t] = replace_at(&targets[t], p, Term::Hole).unwrap();
        let before = match_rule(&rule, &j, &kids);
        let after = match_rule(&rule, &targets[0], &targets[1..]);
        prop_assert!(before.iter().all(|r| matches!(r, MatchResult::Matched(_))));
        for r in after {
            prop_assert!(!matches!(r, MatchResult::Mismatch(_)), "{} {:?}", rule.name, r);
        }
    }
}

#[test]
fn every_builtin_rule_passes_the_scoping_audit() {
    for id in deriver_core::rules::BUILTIN_IDS {
        let sys = builtin_system(id).unwrap();
        sys.audit().unwrap();
        for r in &sys.rules {
            r.audit().unwrap();
        }
    }
}
