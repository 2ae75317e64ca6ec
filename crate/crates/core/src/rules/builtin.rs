//! The three bundled rule systems.

use std::sync::{Arc, OnceLock};

use super::{RuleSystem, SideCond};
use crate::term::JudgmentKind;
use crate::term::Sort::{Ctx, Expr, Name, Num, Prop, Type, Value};

pub const BUILTIN_IDS: &[&str] = &["alfa-typing", "alfa-eval", "prop-nd"];

/// Looks up a bundled system by id. Systems are built once and shared.
pub fn builtin_system(id: &str) -> Option<Arc<RuleSystem>> {
    static SYSTEMS: OnceLock<Vec<Arc<RuleSystem>>> = OnceLock::new();
    SYSTEMS
        .get_or_init(|| {
            vec![
                Arc::new(typing()),
                Arc::new(evaluation()),
                Arc::new(natural_deduction()),
            ]
        })
        .iter()
        .find(|s| s.id == id)
        .cloned()
}

pub fn builtin_systems() -> Vec<Arc<RuleSystem>> {
    BUILTIN_IDS
        .iter()
        .map(|id| builtin_system(id).expect("bundled system"))
        .collect()
}

fn lookup(ctx: &str, key: &str, result: Option<&str>) -> SideCond {
    SideCond::Lookup {
        ctx: ctx.into(),
        key: key.into(),
        result: result.map(Into::into),
    }
}

fn typing() -> RuleSystem {
    let mut s = RuleSystem::builder("alfa-typing", JudgmentKind::Typing);
    let c = "Typing";
    s.rule("T-Var", c)
        .metas(&[("Γ", Ctx), ("x", Name), ("T", Type)])
        .conclusion("Γ |- x : T")
        .side(lookup("Γ", "x", Some("T")))
        .doc("A variable has the type recorded for it in the context. The rightmost declaration of a name shadows earlier ones.");
    s.rule("T-Num", c)
        .metas(&[("Γ", Ctx), ("n", Num)])
        .conclusion("Γ |- n : Num")
        .doc("Integer literals have type Num.");
    s.rule("T-True", c)
        .metas(&[("Γ", Ctx)])
        .conclusion("Γ |- true : Bool")
        .doc("The literal true has type Bool.");
    s.rule("T-False", c)
        .metas(&[("Γ", Ctx)])
        .conclusion("Γ |- false : Bool")
        .doc("The literal false has type Bool.");
    s.rule("T-Plus", c)
        .metas(&[("Γ", Ctx), ("M", Expr), ("N", Expr)])
        .premise("Γ |- M : Num")
        .premise("Γ |- N : Num")
        .conclusion("Γ |- M + N : Num")
        .doc("A sum has type Num when both summands have type Num.");
    s.rule("T-If", c)
        .metas(&[("Γ", Ctx), ("e1", Expr), ("e2", Expr), ("e3", Expr), ("T", Type)])
        .premise("Γ |- e1 : Bool")
        .premise("Γ |- e2 : T")
        .premise("Γ |- e3 : T")
        .conclusion("Γ |- if e1 then e2 else e3 : T")
        .doc("A conditional needs a Bool condition; both branches must share the result type.");
    s.rule("T-Lam", c)
        .metas(&[("Γ", Ctx), ("x", Name), ("T1", Type), ("e", Expr), ("T2", Type)])
        .premise("[Γ, x:T1] |- e : T2")
        .conclusion("Γ |- fun x:T1 -> e : T1 -> T2")
        .doc("A function term is typed by checking its body with the parameter declared at its annotated type.");
    s.rule("T-App", c)
        .metas(&[("Γ", Ctx), ("e1", Expr), ("e2", Expr), ("T2", Type), ("T1", Type)])
        .premise_bound(&["T1"])
        .premise("Γ |- e1 : T1 -> T2")
        .premise("Γ |- e2 : T1")
        .conclusion("Γ |- e1 e2 : T2")
        .doc("Function application: the function must have an arrow type whose domain is the type of the argument.");
    s.rule("T-Let", c)
        .metas(&[("Γ", Ctx), ("x", Name), ("e1", Expr), ("e2", Expr), ("T2", Type), ("T1", Type)])
        .premise_bound(&["T1"])
        .premise("Γ |- e1 : T1")
        .premise("[Γ, x:T1] |- e2 : T2")
        .conclusion("Γ |- let x = e1 in e2 : T2")
        .doc("A let-expression types its body with the bound name declared at the type of its definition.");
    s.build().expect("bundled typing rules are well formed")
}

fn evaluation() -> RuleSystem {
    let mut s = RuleSystem::builder("alfa-eval", JudgmentKind::Eval);
    let c = "Evaluation";
    s.rule("E-Num", c)
        .metas(&[("n", Num)])
        .conclusion("n evalto n")
        .doc("An integer literal evaluates to itself.");
    s.rule("E-True", c)
        .conclusion("true evalto true")
        .doc("The literal true evaluates to itself.");
    s.rule("E-False", c)
        .conclusion("false evalto false")
        .doc("The literal false evaluates to itself.");
    s.rule("E-Fun", c)
        .metas(&[("x", Name), ("T", Type), ("e", Expr)])
        .conclusion("fun x:T -> e evalto fun x:T -> e")
        .doc("A function term is already a value.");
    s.rule("E-Plus", c)
        .metas(&[("e1", Expr), ("e2", Expr), ("n", Num), ("n1", Num), ("n2", Num)])
        .premise_bound(&["n1", "n2"])
        .premise("e1 evalto n1")
        .premise("e2 evalto n2")
        .conclusion("e1 + e2 evalto n")
        .side(SideCond::Arith {
            result: "n".into(),
            left: "n1".into(),
            right: "n2".into(),
        })
        .doc("Evaluate both summands to integers; the result is their sum.");
    s.rule("E-IfTrue", c)
        .metas(&[("e1", Expr), ("e2", Expr), ("e3", Expr), ("v", Value)])
        .premise("e1 evalto true")
        .premise("e2 evalto v")
        .conclusion("if e1 then e2 else e3 evalto v")
        .doc("When the condition evaluates to true, the result is the value of the first branch.");
    s.rule("E-IfFalse", c)
        .metas(&[("e1", Expr), ("e2", Expr), ("e3", Expr), ("v", Value)])
        .premise("e1 evalto false")
        .premise("e3 evalto v")
        .conclusion("if e1 then e2 else e3 evalto v")
        .doc("When the condition evaluates to false, the result is the value of the second branch.");
    s.rule("E-App", c)
        .metas(&[
            ("e1", Expr),
            ("e2", Expr),
            ("v", Value),
            ("x", Name),
            ("T", Type),
            ("e", Expr),
            ("v2", Value),
        ])
        .premise_bound(&["x", "T", "e", "v2"])
        .premise("e1 evalto fun x:T -> e")
        .premise("e2 evalto v2")
        .premise("[v2/x]e evalto v")
        .conclusion("e1 e2 evalto v")
        .doc("Call by value: evaluate the function, then the argument, then the body with the argument value put in for the parameter.");
    s.rule("E-Let", c)
        .metas(&[("x", Name), ("e1", Expr), ("e2", Expr), ("v", Value), ("v1", Value)])
        .premise_bound(&["v1"])
        .premise("e1 evalto v1")
        .premise("[v1/x]e2 evalto v")
        .conclusion("let x = e1 in e2 evalto v")
        .doc("Evaluate the definition, then the body with its value put in for the bound name.");
    s.build().expect("bundled evaluation rules are well formed")
}

fn natural_deduction() -> RuleSystem {
    let mut s = RuleSystem::builder("prop-nd", JudgmentKind::Entail);
    let c = "Propositional";
    s.rule("Asm", c)
        .metas(&[("Γ", Ctx), ("φ", Prop)])
        .conclusion("Γ |- φ")
        .side(lookup("Γ", "φ", None))
        .doc("Any assumption in the context holds.");
    s.rule("AndI", c)
        .metas(&[("Γ", Ctx), ("φ", Prop), ("ψ", Prop)])
        .premise("Γ |- φ")
        .premise("Γ |- ψ")
        .conclusion("Γ |- φ /\\ ψ")
        .doc("Conjunction introduction: prove each conjunct separately.");
    s.rule("AndE1", c)
        .metas(&[("Γ", Ctx), ("φ", Prop), ("ψ", Prop)])
        .premise_bound(&["ψ"])
        .premise("Γ |- φ /\\ ψ")
        .conclusion("Γ |- φ")
        .doc("Conjunction elimination: keep the left conjunct.");
    s.rule("AndE2", c)
        .metas(&[("Γ", Ctx), ("ψ", Prop), ("φ", Prop)])
        .premise_bound(&["φ"])
        .premise("Γ |- φ /\\ ψ")
        .conclusion("Γ |- ψ")
        .doc("Conjunction elimination: keep the right conjunct.");
    s.rule("ImpI", c)
        .metas(&[("Γ", Ctx), ("φ", Prop), ("ψ", Prop)])
        .premise("[Γ, φ] |- ψ")
        .conclusion("Γ |- φ => ψ")
        .doc("Implication introduction: assume the antecedent, then prove the consequent.");
    s.rule("ImpE", c)
        .metas(&[("Γ", Ctx), ("ψ", Prop), ("φ", Prop)])
        .premise_bound(&["φ"])
        .premise("Γ |- φ => ψ")
        .premise("Γ |- φ")
        .conclusion("Γ |- ψ")
        .doc("Modus ponens: from an implication together with its antecedent, conclude the consequent.");
    s.rule("OrI1", c)
        .metas(&[("Γ", Ctx), ("φ", Prop), ("ψ", Prop)])
        .premise("Γ |- φ")
        .conclusion("Γ |- φ \\/ ψ")
        .doc("Disjunction introduction from the left disjunct.");
    s.rule("OrI2", c)
        .metas(&[("Γ", Ctx), ("φ", Prop), ("ψ", Prop)])
        .premise("Γ |- ψ")
        .conclusion("Γ |- φ \\/ ψ")
        .doc("Disjunction introduction from the right disjunct.");
    s.rule("OrE", c)
        .metas(&[("Γ", Ctx), ("χ", Prop), ("φ", Prop), ("ψ", Prop)])
        .premise_bound(&["φ", "ψ"])
        .premise("Γ |- φ \\/ ψ")
        .premise("[Γ, φ] |- χ")
        .premise("[Γ, ψ] |- χ")
        .conclusion("Γ |- χ")
        .doc("Proof by cases: if each disjunct leads to the goal, so does the disjunction.");
    s.rule("NotI", c)
        .metas(&[("Γ", Ctx), ("φ", Prop)])
        .premise("[Γ, φ] |- _|_")
        .conclusion("Γ |- ~φ")
        .doc("Negation introduction: a proposition that leads to falsehood is refuted.");
    s.rule("NotE", c)
        .metas(&[("Γ", Ctx), ("φ", Prop)])
        .premise_bound(&["φ"])
        .premise("Γ |- φ")
        .premise("Γ |- ~φ")
        .conclusion("Γ |- _|_")
        .doc("Negation elimination: a proposition together with its negation yields falsehood.");
    s.rule("FalseE", c)
        .metas(&[("Γ", Ctx), ("φ", Prop)])
        .premise("Γ |- _|_")
        .conclusion("Γ |- φ")
        .doc("Ex falso: from falsehood, conclude anything.");
    s.build().expect("bundled natural deduction rules are well formed")
}
