//! Random well-sorted terms, judgments and whole documents, with holes and
//! abbreviations sprinkled in. Terms are sorted but not necessarily
//! well-typed, which is what round-trip and algebraic properties need.

use deriver_core::document::{
    definition_sort, definition_sorts, DerivNode, DerivationDoc, EditCommand, Feedback, NodeId,
    RuleRef,
};
use deriver_core::rules::builtin_system;
use deriver_core::term::{Judgment, JudgmentKind, Path, Sort, Term};
use rand::seq::SliceRandom;
use rand::Rng;

const VARS: &[&str] = &["x", "y", "z", "f", "x1", "acc"];
const ATOMS: &[&str] = &["A", "B", "C", "P", "Q"];

/// Knobs for term generation.
#[derive(Clone, Debug)]
pub struct TermGen {
    /// Probability that any position becomes a hole.
    pub hole_rate: f64,
    /// Abbreviations that may be referenced, with the sort of their body.
    pub abbrevs: Vec<(String, Sort)>,
    /// Typing contexts (`x : T` entries) or logic contexts (propositions).
    pub logic: bool,
}

impl TermGen {
    pub fn closed(logic: bool) -> TermGen {
        TermGen {
            hole_rate: 0.0,
            abbrevs: Vec::new(),
            logic,
        }
    }

    pub fn with_holes(logic: bool, hole_rate: f64) -> TermGen {
        TermGen {
            hole_rate,
            abbrevs: Vec::new(),
            logic,
        }
    }

    fn abbrev(&self, rng: &mut impl Rng, sort: Sort) -> Option<Term> {
        let fits: Vec<&String> = self
            .abbrevs
            .iter()
            .filter(|(_, s)| *s == sort)
            .map(|(n, _)| n)
            .collect();
        if fits.is_empty() || !rng.gen_bool(0.15) {
            return None;
        }
        Some(Term::Abbrev(fits.choose(rng).expect("non-empty").to_string()))
    }

    /// A term of `sort` at most `depth` constructors deep.
    pub fn term(&self, rng: &mut impl Rng, sort: Sort, depth: usize) -> Term {
        if sort == Sort::Name {
            return Term::var(*VARS.choose(rng).expect("non-empty"));
        }
        if self.hole_rate > 0.0 && rng.gen_bool(self.hole_rate) {
            return Term::Hole;
        }
        if let Some(t) = self.abbrev(rng, sort) {
            return t;
        }
        let leaf = depth == 0 || rng.gen_bool(0.3);
        match sort {
            Sort::Expr | Sort::Value | Sort::Num => self.expr(rng, depth, leaf),
            Sort::Type => {
                if leaf || rng.gen_bool(0.5) {
                    if rng.gen_bool(0.5) {
                        Term::TNum
                    } else {
                        Term::TBool
                    }
                } else {
                    Term::arrow(
                        self.term(rng, Sort::Type, depth - 1),
                        self.term(rng, Sort::Type, depth - 1),
                    )
                }
            }
            Sort::Prop => self.prop(rng, depth, leaf),
            Sort::Ctx => {
                let n = rng.gen_range(0..=3usize.min(depth + 1));
                let entry = if self.logic { Sort::Prop } else { Sort::Entry };
                let d = depth.saturating_sub(1);
                Term::Ctx((0..n).map(|_| self.term(rng, entry, d)).collect())
            }
            Sort::Entry => Term::decl(
                *VARS.choose(rng).expect("non-empty"),
                self.term(rng, Sort::Type, depth.saturating_sub(1)),
            ),
            Sort::Name => unreachable!("handled above"),
        }
    }

    fn expr(&self, rng: &mut impl Rng, depth: usize, leaf: bool) -> Term {
        if leaf {
            return match rng.gen_range(0..4) {
                0 => Term::var(*VARS.choose(rng).expect("non-empty")),
                1 => Term::Bool(rng.gen_bool(0.5)),
                2 => Term::num(rng.gen_range(-50i64..50)),
                _ => Term::num(rng.gen_range(0i64..3)),
            };
        }
        let d = depth - 1;
        let e = |rng: &mut _| self.term(rng, Sort::Expr, d);
        match rng.gen_range(0..5) {
            0 => Term::plus(e(rng), e(rng)),
            1 => Term::if_(e(rng), e(rng), e(rng)),
            2 => {
                let x = self.term(rng, Sort::Name, 0);
                Term::Fun(Box::new(x), Box::new(self.term(rng, Sort::Type, d)), Box::new(e(rng)))
            }
            3 => Term::app(e(rng), e(rng)),
            _ => {
                let x = self.term(rng, Sort::Name, 0);
                Term::Let(Box::new(x), Box::new(e(rng)), Box::new(e(rng)))
            }
        }
    }

    fn prop(&self, rng: &mut impl Rng, depth: usize, leaf: bool) -> Term {
        if leaf {
            return if rng.gen_bool(0.1) {
                Term::Falsum
            } else {
                Term::atom(*ATOMS.choose(rng).expect("non-empty"))
            };
        }
        let d = depth - 1;
        let p = |rng: &mut _| self.term(rng, Sort::Prop, d);
        match rng.gen_range(0..4) {
            0 => Term::and(p(rng), p(rng)),
            1 => Term::or(p(rng), p(rng)),
            2 => Term::implies(p(rng), p(rng)),
            _ => Term::not(p(rng)),
        }
    }

    /// A judgment of `kind` whose slots are at most `depth` deep; with a
    /// hole rate set, the whole judgment may itself be a hole.
    pub fn judgment(&self, rng: &mut impl Rng, kind: JudgmentKind, depth: usize) -> Judgment {
        if self.hole_rate > 0.0 && rng.gen_bool(self.hole_rate / 2.0) {
            return Judgment::Hole;
        }
        let s = kind.slot_sorts();
        match kind {
            JudgmentKind::Typing => Judgment::typing(
                self.term(rng, s[0], depth),
                self.term(rng, s[1], depth),
                self.term(rng, s[2], depth),
            ),
            JudgmentKind::Eval => {
                Judgment::eval(self.term(rng, s[0], depth), self.term(rng, s[1], depth))
            }
            JudgmentKind::Entail => {
                Judgment::entail(self.term(rng, s[0], depth), self.term(rng, s[1], depth))
            }
        }
    }
}

/// Shape limits for random documents.
#[derive(Clone, Debug)]
pub struct DocGen {
    /// Maximum tree depth (root at depth 0).
    pub tree_depth: usize,
    pub term_depth: usize,
    pub max_children: usize,
    pub max_defs: usize,
    pub max_subtrees: usize,
}

impl Default for DocGen {
    fn default() -> DocGen {
        DocGen {
            tree_depth: 6,
            term_depth: 3,
            max_children: 3,
            max_defs: 3,
            max_subtrees: 2,
        }
    }
}


fn term_paths(t: &Term, at: &mut Vec<usize>, out: &mut Vec<Path>) {
    out.push(Path(at.clone()));
    for (i, c) in t.children().into_iter().enumerate() {
        at.push(i);
        term_paths(c, at, out);
        at.pop();
    }
}

/// Every subterm position of `j` (excluding the judgment itself), in
/// preorder. Binder names are included; use [`hole_paths`] for positions
/// that may hold a hole.
pub fn judgment_paths(j: &Judgment) -> Vec<Path> {
    let mut out = Vec::new();
    for (i, slot) in j.slots().into_iter().enumerate() {
        term_paths(slot, &mut vec![i], &mut out);
    }
    out
}

/// Positions of `j` where a hole is admissible (everything but names).
pub fn hole_paths(j: &Judgment) -> Vec<Path> {
    judgment_paths(j)
        .into_iter()
        .filter(|p| j.sort_at(p).is_ok_and(|s| s != Sort::Name))
        .collect()
}

/// A random edit command against `doc`. Commands are plausible but not
/// always legal; callers must accept rejections.
pub fn random_edit(rng: &mut impl Rng, doc: &DerivationDoc) -> EditCommand {
    let kind = doc.system.kind;
    let ids: Vec<NodeId> = doc.node_ids().into_iter().collect();
    let node = *ids.choose(rng).expect("documents have a root");
    let n = doc.node(node).expect("id from the document");
    let mut terms = TermGen::with_holes(kind == JudgmentKind::Entail, 0.15);
    for d in &doc.prelude {
        if let Some(sort) = definition_sort(&d.term) {
            terms.abbrevs.push((d.name.clone(), sort));
        }
    }
    let shape = if n.judgment.is_hole() {
        kind.skeleton()
    } else {
        n.judgment.clone()
    };
    let rules: Vec<&String> = doc.system.rules.iter().map(|r| &r.name).collect();
    let fresh = |prefix: &str| format!("{prefix}{}", rng_suffix(doc));
    match rng.gen_range(0..14) {
        0 | 1 => EditCommand::SetRule {
            node,
            rule: rules.choose(rng).expect("rules").to_string(),
        },
        2 => EditCommand::ClearRule { node },
        3 => EditCommand::AddPremise {
            node,
            position: rng.gen_bool(0.5).then(|| rng.gen_range(0..=n.children.len())),
        },
        4 => EditCommand::RemovePremise {
            node,
            position: rng.gen_range(0..=n.children.len()),
        },
        5 | 6 => {
            let paths = hole_paths(&shape);
            let path = paths.choose(rng).cloned().unwrap_or_else(|| Path(vec![0]));
            let sort = shape.sort_at(&path).unwrap_or(Sort::Expr);
            let term = terms.term(rng, sort, 2);
            if rng.gen_bool(0.5) {
                EditCommand::FillHole { node, path, term }
            } else {
                EditCommand::EditJudgment { node, path, term }
            }
        }
        7 => EditCommand::SetJudgment {
            node,
            judgment: terms.judgment(rng, kind, 2),
        },
        8 => {
            let paths = hole_paths(&shape);
            let path = if rng.gen_bool(0.2) {
                Path::root()
            } else {
                paths.choose(rng).cloned().unwrap_or_else(Path::root)
            };
            EditCommand::MakeHole { node, path }
        }
        9 => {
            let sort = *definition_sorts(kind).choose(rng).expect("non-empty");
            EditCommand::DefineAbbrev {
                name: fresh("A"),
                term: terms.term(rng, sort, 2),
            }
        }
        10 => match doc.prelude.last() {
            Some(d) if rng.gen_bool(0.7) => EditCommand::RemoveAbbrev { name: d.name.clone() },
            _ => EditCommand::DefineSubtree { name: fresh("T") },
        },
        11 => match doc.subtrees.last() {
            Some(s) if rng.gen_bool(0.5) => EditCommand::RemoveSubtree { name: s.name.clone() },
            _ => EditCommand::DefineSubtree { name: fresh("T") },
        },
        12 => match doc.subtrees.choose(rng) {
            Some(s) => EditCommand::InsertSubtreeRef {
                node,
                subtree: s.name.clone(),
            },
            None => EditCommand::ClearRule { node },
        },
        _ => EditCommand::SetFeedback {
            feedback: if doc.feedback == Feedback::Full {
                Feedback::Silent
            } else {
                Feedback::Full
            },
        },
    }
}

/// A suffix unused by any name in `doc`.
fn rng_suffix(doc: &DerivationDoc) -> usize {
    doc.prelude.len() + doc.subtrees.len() + doc.node_count()
}

impl DocGen {
    fn tree(
        &self,
        rng: &mut impl Rng,
        terms: &TermGen,
        kind: JudgmentKind,
        rules: &[String],
        subtrees: &[String],
        depth: usize,
    ) -> DerivNode {
        let judgment = terms.judgment(rng, kind, self.term_depth);
        let rule = match rng.gen_range(0..10) {
            0..=2 => RuleRef::Hole,
            3 if !subtrees.is_empty() => {
                RuleRef::Subtree(subtrees.choose(rng).expect("non-empty").clone())
            }
            // an unknown rule name is a verification error, not a format error
            4 if rng.gen_bool(0.2) => RuleRef::Rule("No-Such-Rule".into()),
            _ => RuleRef::Rule(rules.choose(rng).expect("systems have rules").clone()),
        };
        let children = if matches!(rule, RuleRef::Subtree(_)) || depth >= self.tree_depth {
            Vec::new()
        } else {
            let n = rng.gen_range(0..=self.max_children);
            // thin out deep levels so documents stay small
            let n = if depth >= 2 { n.min(rng.gen_range(0..=1)) } else { n };
            (0..n)
                .map(|_| self.tree(rng, terms, kind, rules, subtrees, depth + 1))
                .collect()
        };
        DerivNode {
            id: NodeId(0),
            judgment,
            rule,
            children,
        }
    }

    /// A random valid document over one of the built-in systems.
    pub fn document(&self, rng: &mut impl Rng) -> DerivationDoc {
        let id = *["alfa-typing", "alfa-eval", "prop-nd"].choose(rng).expect("non-empty");
        let system = builtin_system(id).expect("built-in system");
        let kind = system.kind;
        let rules: Vec<String> = system.rules.iter().map(|r| r.name.clone()).collect();
        let mut terms = TermGen::with_holes(kind == JudgmentKind::Entail, 0.1);
        let mut prelude = Vec::new();
        for i in 0..rng.gen_range(0..=self.max_defs) {
            let sort = *definition_sorts(kind).choose(rng).expect("non-empty");
            let body = terms.term(rng, sort, 2);
            let name = format!("D{i}");
            prelude.push((name.clone(), body));
            terms.abbrevs.push((name, sort));
        }
        let mut subtrees: Vec<(String, DerivNode)> = Vec::new();
        let mut names: Vec<String> = Vec::new();
        for i in 0..rng.gen_range(0..=self.max_subtrees) {
            let t = self.tree(rng, &terms, kind, &rules, &names, 2);
            let name = format!("S{i}");
            subtrees.push((name.clone(), t));
            names.push(name);
        }
        let root = self.tree(rng, &terms, kind, &rules, &names, 0);
        let feedback = if rng.gen_bool(0.2) {
            Feedback::Silent
        } else {
            Feedback::Full
        };
        DerivationDoc::from_parts(system, feedback, prelude, subtrees, root)
            .expect("generated documents satisfy the invariants")
    }
}
