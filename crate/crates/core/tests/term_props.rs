use std::rc::Rc;

use deriver_core::term::{
    eq3, eq3_judgment, replace_at, subterm_at, substitute, Judgment, JudgmentKind, Term, TriBool,
};
use deriver_testkit::alfa::{env_eval, expr_of_term, random_closed_term, Env, EnvValue, Expr};
use deriver_testkit::gen::{hole_paths, judgment_paths, TermGen};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn name() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["x", "y", "f"]).prop_map(str::to_string)
}

fn ty() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![Just(Term::TNum), Just(Term::TBool)];
    leaf.prop_recursive(2, 4, 2, |inner| {
        (inner.clone(), inner).prop_map(|(a, b)| Term::arrow(a, b))
    })
}

/// Expressions, optionally with holes.
fn expr(holes: bool) -> impl Strategy<Value = Term> {
    let hole_weight = if holes { 1 } else { 0 };
    let leaf = prop_oneof![
        3 => name().prop_map(Term::var),
        3 => (-5i64..5).prop_map(Term::num),
        1 => any::<bool>().prop_map(Term::Bool),
        hole_weight => Just(Term::Hole),
    ];
    leaf.prop_recursive(4, 40, 3, |e| {
        prop_oneof![
            (e.clone(), e.clone()).prop_map(|(a, b)| Term::plus(a, b)),
            (e.clone(), e.clone(), e.clone()).prop_map(|(a, b, c)| Term::if_(a, b, c)),
            (name(), ty(), e.clone()).prop_map(|(x, t, b)| Term::fun(x, t, b)),
            (e.clone(), e.clone()).prop_map(|(a, b)| Term::app(a, b)),
            (name(), e.clone(), e).prop_map(|(x, a, b)| Term::let_(x, a, b)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn eq3_is_reflexive_on_hole_free_terms(t in expr(false)) {
        prop_assert_eq!(eq3(&t, &t), TriBool::Yes);
    }

    #[test]
    fn eq3_classification_is_symmetric(a in expr(true), b in expr(true)) {
        prop_assert_eq!(eq3(&a, &b).class(), eq3(&b, &a).class());
    }

    #[test]
    fn eq3_unknown_always_names_holes(a in expr(true), b in expr(true)) {
        if let TriBool::Unknown(hs) = eq3(&a, &b) {
            prop_assert!(!hs.is_empty());
        }
    }

    #[test]
    fn punching_a_hole_never_yields_no(t in expr(false), ty in ty(), pick in any::<prop::sample::Index>()) {
        let j = Judgment::typing(Term::Ctx(vec![]), t, ty);
        let paths = hole_paths(&j);
        let p = pick.get(&paths);
        let holed = replace_at(&j, p, Term::Hole).unwrap();
        prop_assert!(!eq3_judgment(&holed, &j).is_no());
        prop_assert!(!eq3_judgment(&j, &holed).is_no());
    }

    #[test]
    fn replace_then_subterm_returns_the_replacement(seed in any::<u64>(), kind in 0usize..3, pick in any::<prop::sample::Index>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let kind = [JudgmentKind::Typing, JudgmentKind::Eval, JudgmentKind::Entail][kind];
        let g = TermGen::with_holes(kind == JudgmentKind::Entail, 0.1);
        let mut j = g.judgment(&mut rng, kind, 3);
        if j.is_hole() {
            j = kind.skeleton();
        }
        let paths = judgment_paths(&j);
        let p = pick.get(&paths);
        let sort = j.sort_at(p).unwrap();
        let t = g.term(&mut rng, sort, 2);
        let replaced = replace_at(&j, p, t.clone()).unwrap();
        prop_assert_eq!(subterm_at(&replaced, p), Ok(&t));
    }
}

/// Big-step evaluation of engine terms whose only binding operation is the
/// engine's own `substitute`.
fn eval_by_substitution(t: &Term) -> Term {
    match t {
        Term::Num(_) | Term::Bool(_) | Term::Fun(..) => t.clone(),
        Term::Plus(a, b) => match (eval_by_substitution(a), eval_by_substitution(b)) {
            (Term::Num(x), Term::Num(y)) => Term::Num(x + y),
            other => panic!("ill-typed sum {other:?}"),
        },
        Term::If(c, a, b) => match eval_by_substitution(c) {
            Term::Bool(true) => eval_by_substitution(a),
            Term::Bool(false) => eval_by_substitution(b),
            other => panic!("ill-typed condition {other:?}"),
        },
        Term::App(f, a) => {
            let Term::Fun(x, _, body) = eval_by_substitution(f) else {
                panic!("ill-typed application")
            };
            let v = eval_by_substitution(a);
            eval_by_substitution(&substitute(&body, x.as_var().unwrap(), &v).unwrap())
        }
        Term::Let(x, a, body) => {
            let v = eval_by_substitution(a);
            eval_by_substitution(&substitute(body, x.as_var().unwrap(), &v).unwrap())
        }
        other => panic!("stuck on {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn substitution_agrees_with_environments(seed in any::<u64>()) {
        let (e, _) = random_closed_term(&mut StdRng::seed_from_u64(seed), 5);
        let by_subst = eval_by_substitution(&e.to_term());
        let by_env = env_eval(&Rc::new(Env::default()), &e).unwrap();
        match (expr_of_term(&by_subst).unwrap(), by_env) {
            (Expr::Num(a), EnvValue::Num(b)) => prop_assert_eq!(a, b),
            (Expr::Bool(a), EnvValue::Bool(b)) => prop_assert_eq!(a, b),
            (Expr::Fun(..), EnvValue::Closure { .. }) => {}
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }
}

#[test]
fn identity_application_substitutes_the_argument() {
    let body = Term::var("x");
    assert_eq!(substitute(&body, "x", &Term::num(7)), Ok(Term::num(7)));
    let e = Term::app(Term::fun("x", Term::TNum, body), Term::num(7));
    assert_eq!(eval_by_substitution(&e), Term::num(7));
}
