//! Bounded backward proof search for intuitionistic propositional natural
//! deduction, emitting derivations named after the `prop-nd` rules.

use std::collections::BTreeSet;

use deriver_core::document::{DerivNode, NodeId, RuleRef};
use deriver_core::term::{Judgment, Term};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Prop {
    Atom(String),
    And(Box<Prop>, Box<Prop>),
    Or(Box<Prop>, Box<Prop>),
    Imp(Box<Prop>, Box<Prop>),
    Not(Box<Prop>),
    Bot,
}

impl Prop {
    pub fn atom(s: &str) -> Prop {
        Prop::Atom(s.to_string())
    }

    pub fn and(a: Prop, c: Prop) -> Prop {
        Prop::And(Box::new(a), Box::new(c))
    }

    pub fn or(a: Prop, c: Prop) -> Prop {
        Prop::Or(Box::new(a), Box::new(c))
    }

    pub fn imp(a: Prop, c: Prop) -> Prop {
        Prop::Imp(Box::new(a), Box::new(c))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Prop) -> Prop {
        Prop::Not(Box::new(a))
    }

    pub fn to_term(&self) -> Term {
        match self {
            Prop::Atom(a) => Term::atom(a.as_str()),
            Prop::And(a, c) => Term::and(a.to_term(), c.to_term()),
            Prop::Or(a, c) => Term::or(a.to_term(), c.to_term()),
            Prop::Imp(a, c) => Term::implies(a.to_term(), c.to_term()),
            Prop::Not(a) => Term::not(a.to_term()),
            Prop::Bot => Term::Falsum,
        }
    }

    pub fn from_term(t: &Term) -> Option<Prop> {
        let bx = |t: &Term| Prop::from_term(t).map(Box::new);
        Some(match t {
            Term::Atom(a) => Prop::Atom(a.clone()),
            Term::And(a, c) => Prop::And(bx(a)?, bx(c)?),
            Term::Or(a, c) => Prop::Or(bx(a)?, bx(c)?),
            Term::Implies(a, c) => Prop::Imp(bx(a)?, bx(c)?),
            Term::Not(a) => Prop::Not(bx(a)?),
            Term::Falsum => Prop::Bot,
            _ => return None,
        })
    }

    fn subformulas(&self, out: &mut BTreeSet<Prop>) {
        if !out.insert(self.clone()) {
            return;
        }
        match self {
            Prop::And(a, c) | Prop::Or(a, c) | Prop::Imp(a, c) => {
                a.subformulas(out);
                c.subformulas(out);
            }
            Prop::Not(a) => a.subformulas(out),
            Prop::Atom(_) | Prop::Bot => {}
        }
    }
}

struct Search {
    /// Candidate formulas for premise-only positions.
    universe: Vec<Prop>,
}

fn leaf(ctx: &[Prop], goal: &Prop, rule: &str, children: Vec<DerivNode>) -> DerivNode {
    DerivNode {
        id: NodeId(0),
        judgment: Judgment::entail(
            Term::Ctx(ctx.iter().map(Prop::to_term).collect()),
            goal.to_term(),
        ),
        rule: RuleRef::Rule(rule.to_string()),
        children,
    }
}

fn extended(ctx: &[Prop], p: &Prop) -> Vec<Prop> {
    let mut out = ctx.to_vec();
    out.push(p.clone());
    out
}

impl Search {
    /// A derivation of `ctx |- goal` at most `depth` rule applications tall.
    fn prove(&self, ctx: &[Prop], goal: &Prop, depth: usize) -> Option<DerivNode> {
        if depth == 0 {
            return None;
        }
        if ctx.contains(goal) {
            return Some(leaf(ctx, goal, "Asm", vec![]));
        }
        let d = depth - 1;
        let mk = |rule: &str, kids: Vec<DerivNode>| Some(leaf(ctx, goal, rule, kids));
        // introductions first: they are invertible except for disjunction
        match goal {
            Prop::And(a, c) => {
                if let (Some(l), Some(r)) = (self.prove(ctx, a, d), self.prove(ctx, c, d)) {
                    return mk("AndI", vec![l, r]);
                }
            }
            Prop::Imp(a, c) => {
                if let Some(p) = self.prove(&extended(ctx, a), c, d) {
                    return mk("ImpI", vec![p]);
                }
            }
            Prop::Not(a) => {
                if let Some(p) = self.prove(&extended(ctx, a), &Prop::Bot, d) {
                    return mk("NotI", vec![p]);
                }
            }
            Prop::Or(a, c) => {
                if let Some(p) = self.prove(ctx, a, d) {
                    return mk("OrI1", vec![p]);
                }
                if let Some(p) = self.prove(ctx, c, d) {
                    return mk("OrI2", vec![p]);
                }
            }
            Prop::Atom(_) | Prop::Bot => {}
        }
        if d == 0 {
            return None;
        }
        for p in &self.universe {
            match p {
                Prop::And(a, c) if **a == *goal || **c == *goal => {
                    if let Some(q) = self.prove(ctx, p, d) {
                        let rule = if **a == *goal { "AndE1" } else { "AndE2" };
                        return mk(rule, vec![q]);
                    }
                }
                Prop::Imp(a, c) if **c == *goal => {
                    if let Some(f) = self.prove(ctx, p, d) {
                        if let Some(x) = self.prove(ctx, a, d) {
                            return mk("ImpE", vec![f, x]);
                        }
                    }
                }
                _ => {}
            }
        }
        for p in &self.universe {
            if let Prop::Or(a, c) = p {
                if let Some(o) = self.prove(ctx, p, d) {
                    let l = self.prove(&extended(ctx, a), goal, d);
                    let r = self.prove(&extended(ctx, c), goal, d);
                    if let (Some(l), Some(r)) = (l, r) {
                        return mk("OrE", vec![o, l, r]);
                    }
                }
            }
        }
        if *goal == Prop::Bot {
            for p in &self.universe {
                if let Prop::Not(a) = p {
                    if let Some(n) = self.prove(ctx, p, d) {
                        if let Some(x) = self.prove(ctx, a, d) {
                            return mk("NotE", vec![x, n]);
                        }
                    }
                }
            }
        } else if let Some(b) = self.prove(ctx, &Prop::Bot, d) {
            return mk("FalseE", vec![b]);
        }
        None
    }
}

/// Searches for a derivation of `ctx |- goal` of height at most `depth`.
/// Premise-only formulas are drawn from the subformulas of the sequent.
pub fn prove(ctx: &[Prop], goal: &Prop, depth: usize) -> Option<DerivNode> {
    let mut subs = BTreeSet::new();
    goal.subformulas(&mut subs);
    for p in ctx {
        p.subformulas(&mut subs);
    }
    let search = Search {
        universe: subs.into_iter().collect(),
    };
    search.prove(ctx, goal, depth)
}

/// Height of a derivation tree, counting rule applications.
pub fn height(d: &DerivNode) -> usize {
    1 + d.children.iter().map(height).max().unwrap_or(0)
}
