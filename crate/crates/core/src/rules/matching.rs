//! Three-valued matching of rule schemas against concrete judgments.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use super::{Locus, SideCond};
use crate::term::{
    ctx_lookup, eq3, substitute, CtxStyle, Judgment, JudgmentKind, LookupResult, Metavar, Path,
    Sort, Term, TriBool,
};
use crate::textio::print_term;

/// Where a metavariable was first bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Origin {
    pub locus: Locus,
    pub path: Path,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binding {
    pub term: Term,
    pub origin: Origin,
}

/// Metavariable assignment accumulated while matching one rule application.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bindings {
    map: BTreeMap<String, Binding>,
}

impl Bindings {
    pub fn new() -> Bindings {
        Bindings::default()
    }

    pub fn get(&self, name: &str) -> Option<&Binding> {
        self.map.get(name)
    }

    pub fn term(&self, name: &str) -> Option<&Term> {
        self.map.get(name).map(|b| &b.term)
    }

    pub fn insert(&mut self, name: impl Into<String>, term: Term, origin: Origin) {
        self.map.insert(name.into(), Binding { term, origin });
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Binding)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MismatchKind {
    /// Constructor or sort disagreement; `expected`/`found` are descriptions.
    Shape,
    /// Two concrete terms disagree; `expected`/`found` are printed terms.
    Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub locus: Locus,
    /// Path within the judgment named by `locus`.
    pub path: Path,
    pub expected: String,
    pub found: String,
    pub kind: MismatchKind,
}

impl Mismatch {
    pub fn message(&self) -> String {
        match self.kind {
            MismatchKind::Shape => format!("Expected {}, but found {}.", self.expected, self.found),
            MismatchKind::Term => {
                format!("Expected `{}`, but found `{}`.", self.expected, self.found)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatchResult {
    Matched(Bindings),
    Mismatch(Vec<Mismatch>),
    /// Holes in the subject (paths from the judgment root) that block a decision.
    Blocked(Vec<Path>),
}

/// Matching state threaded through the conclusion and premises of one rule.
pub(crate) struct Matcher {
    pub bindings: Bindings,
    pub mismatches: Vec<Mismatch>,
    pub blocked: Vec<(Locus, Path)>,
    /// Substitutions that could not be computed yet.
    pub pending: Vec<(Locus, Path)>,
    locus: Locus,
    style: CtxStyle,
    output_slot: Option<usize>,
}

impl Matcher {
    pub fn new(seed: Bindings, kind: JudgmentKind) -> Matcher {
        Matcher {
            bindings: seed,
            mismatches: Vec::new(),
            blocked: Vec::new(),
            pending: Vec::new(),
            locus: Locus::Conclusion,
            style: kind.ctx_style(),
            output_slot: kind.output_slot(),
        }
    }

    pub fn set_locus(&mut self, locus: Locus) {
        self.locus = locus;
    }

    fn mismatch(&mut self, path: &[usize], expected: String, found: String, kind: MismatchKind) {
        self.mismatches.push(Mismatch {
            locus: self.locus,
            path: Path(path.to_vec()),
            expected,
            found,
            kind,
        });
    }

    fn block_holes(&mut self, s: &Term, path: &[usize]) {
        let base = Path(path.to_vec());
        for h in s.hole_paths() {
            self.blocked.push((self.locus, base.join(&h)));
        }
    }

    pub fn judgment(&mut self, schema: &Judgment, subject: &Judgment) {
        if subject.is_hole() {
            self.blocked.push((self.locus, Path::root()));
            return;
        }
        if schema.kind() != subject.kind() {
            let exp = schema.kind().map_or("a judgment", |k| k.describe());
            let found = subject.kind().map_or("a judgment", |k| k.describe());
            self.mismatch(&[], exp.into(), found.into(), MismatchKind::Shape);
            return;
        }
        let mut path = Vec::new();
        for (i, (p, s)) in schema.slots().into_iter().zip(subject.slots()).enumerate() {
            path.push(i);
            self.pattern(p, s, &mut path);
            path.pop();
        }
    }

    fn pattern(&mut self, p: &Term, s: &Term, path: &mut Vec<usize>) {
        match p {
            Term::Meta(m) => self.meta(m, s, path),
            Term::Subst(..) => self.subst(p, s, path),
            Term::Ctx(entries) if matches!(s, Term::Ctx(_)) => {
                let Term::Ctx(subject) = s else { unreachable!() };
                self.ctx(entries, subject, s, path)
            }
            _ if s.is_hole() => self.blocked.push((self.locus, Path(path.clone()))),
            _ if !p.same_head(s) => {
                let (e, f, kind) = if std::mem::discriminant(p) == std::mem::discriminant(s)
                    && p.children().is_empty()
                {
                    (print_term(p), print_term(s), MismatchKind::Term)
                } else {
                    (p.describe(), s.describe(), MismatchKind::Shape)
                };
                self.mismatch(path, e, f, kind);
            }
            _ => {
                for (i, (pc, sc)) in p.children().into_iter().zip(s.children()).enumerate() {
                    path.push(i);
                    self.pattern(pc, sc, path);
                    path.pop();
                }
            }
        }
    }

    fn ctx(&mut self, pat: &[Term], subject: &[Term], whole: &Term, path: &mut Vec<usize>) {
        let splice = match pat.first() {
            Some(Term::Meta(m)) if m.sort == Sort::Ctx => Some(m),
            _ => None,
        };
        let fixed = if splice.is_some() { &pat[1..] } else { pat };
        let offset = match splice {
            Some(_) if subject.len() < fixed.len() => {
                let n = fixed.len();
                let e = format!("a context with at least {n} entr{}", if n == 1 { "y" } else { "ies" });
                self.mismatch(path, e, whole.describe(), MismatchKind::Shape);
                return;
            }
            Some(m) => {
                let offset = subject.len() - fixed.len();
                let prefix = Term::Ctx(subject[..offset].to_vec());
                self.meta(m, &prefix, path);
                offset
            }
            None if subject.len() != fixed.len() => {
                let e = Term::Ctx(fixed.to_vec()).describe();
                self.mismatch(path, e, whole.describe(), MismatchKind::Shape);
                return;
            }
            None => 0,
        };
        for (i, p) in fixed.iter().enumerate() {
            path.push(offset + i);
            self.pattern(p, &subject[offset + i], path);
            path.pop();
        }
    }

    fn meta(&mut self, m: &Metavar, s: &Term, path: &[usize]) {
        if let Some(b) = self.bindings.get(&m.name).cloned() {
            match eq3(&b.term, s) {
                TriBool::Yes => {}
                TriBool::Unknown(hs) => {
                    let base = Path(path.to_vec());
                    self.blocked.extend(hs.iter().map(|h| (self.locus, base.join(h))));
                }
                TriBool::No(w) => self.conflict(&b, s, path, &w),
            }
            return;
        }
        if s.has_holes() {
            self.block_holes(s, path);
        } else if !m.sort.admits(s, self.style) {
            self.mismatch(path, m.sort.describe().into(), s.describe(), MismatchKind::Shape);
        } else {
            let origin = Origin {
                locus: self.locus,
                path: Path(path.to_vec()),
            };
            self.bindings.insert(m.name.clone(), s.clone(), origin);
        }
    }

    /// Reports a disagreement between an earlier binding and `s`.
    ///
    /// When the earlier binding came from the conclusion's output slot and
    /// the clash is found in a premise, the conclusion is the one in error:
    /// its result does not follow from the premises.
    fn conflict(&mut self, b: &Binding, s: &Term, path: &[usize], w: &Path) {
        let bound_at = b.term.at(&w.0).map_or_else(|| print_term(&b.term), print_term);
        let found_at = s.at(&w.0).map_or_else(|| print_term(s), print_term);
        let from_output = b.origin.locus == Locus::Conclusion
            && self.locus != Locus::Conclusion
            && self.output_slot.is_some()
            && b.origin.path.0.first().copied() == self.output_slot;
        if from_output {
            self.mismatches.push(Mismatch {
                locus: Locus::Conclusion,
                path: b.origin.path.join(w),
                expected: found_at,
                found: bound_at,
                kind: MismatchKind::Term,
            });
        } else {
            let p = Path(path.to_vec()).join(w);
            self.mismatches.push(Mismatch {
                locus: self.locus,
                path: p,
                expected: bound_at,
                found: found_at,
                kind: MismatchKind::Term,
            });
        }
    }

    fn subst(&mut self, p: &Term, s: &Term, path: &[usize]) {
        let inst = instantiate_term(p, &self.bindings);
        if matches!(inst, Term::Subst(..)) || inst.has_metas() {
            if s.has_holes() {
                self.block_holes(s, path);
            } else {
                self.pending.push((self.locus, Path(path.to_vec())));
            }
            return;
        }
        match eq3(&inst, s) {
            TriBool::Yes => {}
            TriBool::Unknown(_) => self.block_holes(s, path),
            TriBool::No(w) => {
                let e = inst.at(&w.0).map_or_else(|| print_term(&inst), print_term);
                let f = s.at(&w.0).map_or_else(|| print_term(s), print_term);
                let p = Path(path.to_vec()).join(&w);
                self.mismatches.push(Mismatch {
                    locus: self.locus,
                    path: p,
                    expected: e,
                    found: f,
                    kind: MismatchKind::Term,
                });
            }
        }
    }

    pub fn result(self) -> MatchResult {
        if !self.mismatches.is_empty() {
            MatchResult::Mismatch(self.mismatches)
        } else if !self.blocked.is_empty() {
            MatchResult::Blocked(self.blocked.into_iter().map(|(_, p)| p).collect())
        } else if !self.pending.is_empty() {
            MatchResult::Blocked(self.pending.into_iter().map(|(_, p)| p).collect())
        } else {
            MatchResult::Matched(self.bindings)
        }
    }
}

/// Matches `schema` against `subject`, extending `seed`.
pub fn match_schema(schema: &Judgment, subject: &Judgment, seed: &Bindings) -> MatchResult {
    let kind = schema
        .kind()
        .or(subject.kind())
        .unwrap_or(JudgmentKind::Typing);
    let mut m = Matcher::new(seed.clone(), kind);
    m.judgment(schema, subject);
    m.result()
}

/// Replaces bound metavariables and computes substitutions whose parts are
/// all concrete. Unbound metavariables are left in place.
pub fn instantiate(schema: &Judgment, b: &Bindings) -> Judgment {
    schema.map_slots(|t| instantiate_term(t, b))
}

pub(crate) fn instantiate_term(t: &Term, b: &Bindings) -> Term {
    match t {
        Term::Meta(m) => b.term(&m.name).cloned().unwrap_or_else(|| t.clone()),
        Term::Ctx(entries) => {
            let mut out = Vec::new();
            for e in entries {
                match (e, instantiate_term(e, b)) {
                    (Term::Meta(m), Term::Ctx(prefix)) if m.sort == Sort::Ctx => out.extend(prefix),
                    (_, other) => out.push(other),
                }
            }
            Term::Ctx(out)
        }
        Term::Subst(e, x, v) => {
            let (e, x, v) = (instantiate_term(e, b), instantiate_term(x, b), instantiate_term(v, b));
            let concrete = !e.has_metas() && !v.has_metas() && !v.has_holes();
            if let (true, Some(name)) = (concrete, x.as_var()) {
                if let Ok(r) = substitute(&e, name, &v) {
                    return r;
                }
            }
            Term::subst(e, x, v)
        }
        _ => {
            let mut out = t.clone();
            for i in 0..t.children().len() {
                let c = instantiate_term(t.child(i).expect("index in range"), b);
                *out.child_mut(i).expect("index in range") = c;
            }
            out
        }
    }
}

/// Outcome of evaluating one side condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum SideOutcome {
    Holds,
    /// Undecided; holes in the conclusion that keep it open, when known.
    Unknown(Vec<Path>),
    Fails {
        /// Path in the conclusion of the term the failure is reported on.
        path: Path,
        expected: String,
        found: String,
        message: String,
    },
}

fn conclusion_path(b: &Bindings, name: &str) -> Path {
    match b.get(name) {
        Some(Binding { origin, .. }) if origin.locus == Locus::Conclusion => origin.path.clone(),
        _ => Path::root(),
    }
}

fn as_num(t: &Term) -> Option<&BigInt> {
    match t {
        Term::Num(n) => Some(n),
        _ => None,
    }
}

pub(crate) fn eval_side_condition(
    c: &SideCond,
    index: usize,
    b: &mut Bindings,
    style: CtxStyle,
) -> SideOutcome {
    match c {
        SideCond::Lookup { ctx, key, result } => {
            let (Some(g), Some(k)) = (b.term(ctx).cloned(), b.term(key).cloned()) else {
                return SideOutcome::Unknown(Vec::new());
            };
            match ctx_lookup(&g, &k) {
                LookupResult::Unknown(holes) => SideOutcome::Unknown(match b.get(ctx) {
                    Some(Binding { origin, .. }) if origin.locus == Locus::Conclusion => {
                        holes.iter().map(|h| origin.path.join(h)).collect()
                    }
                    _ => Vec::new(),
                }),
                LookupResult::Absent => {
                    let shown = print_term(&k);
                    let (expected, message) = match style {
                        CtxStyle::Typing => (
                            format!("a declaration of {shown}"),
                            format!("Variable `{shown}` is not declared in the context."),
                        ),
                        CtxStyle::Logic => (
                            format!("{shown} among the assumptions"),
                            format!("Assumption `{shown}` is not in the context."),
                        ),
                    };
                    SideOutcome::Fails {
                        path: conclusion_path(b, key),
                        expected,
                        found: "no such entry".into(),
                        message,
                    }
                }
                LookupResult::Found(found) => {
                    let Some(r) = result else {
                        return SideOutcome::Holds;
                    };
                    match b.term(r).cloned() {
                        None => {
                            let origin = Origin {
                                locus: Locus::SideCondition(index),
                                path: Path::root(),
                            };
                            b.insert(r.clone(), found, origin);
                            SideOutcome::Holds
                        }
                        Some(bound) => match eq3(&found, &bound) {
                            TriBool::Yes => SideOutcome::Holds,
                            TriBool::Unknown(_) => SideOutcome::Unknown(Vec::new()),
                            TriBool::No(_) => {
                                let (e, f) = (print_term(&found), print_term(&bound));
                                SideOutcome::Fails {
                                    path: conclusion_path(b, r),
                                    message: format!(
                                        "Expected `{e}` (the type of {} in the context), but found `{f}`.",
                                        print_term(&k)
                                    ),
                                    expected: e,
                                    found: f,
                                }
                            }
                        },
                    }
                }
            }
        }
        SideCond::Arith {
            result,
            left,
            right,
        } => {
            let terms = (b.term(result), b.term(left), b.term(right));
            let (Some(r), Some(l), Some(rt)) = terms else {
                return SideOutcome::Unknown(Vec::new());
            };
            let (Some(r), Some(l), Some(rt)) = (as_num(r), as_num(l), as_num(rt)) else {
                return SideOutcome::Unknown(Vec::new());
            };
            let sum = l + rt;
            if &sum == r {
                SideOutcome::Holds
            } else {
                SideOutcome::Fails {
                    path: conclusion_path(b, result),
                    expected: sum.to_string(),
                    found: r.to_string(),
                    message: format!("Expected `{sum}` ({l} + {rt}), but found `{r}`."),
                }
            }
        }
        SideCond::IsValue(m) => match b.term(m) {
            None => SideOutcome::Unknown(Vec::new()),
            Some(t) if t.has_holes() => SideOutcome::Unknown(Vec::new()),
            Some(t) if t.is_value() => SideOutcome::Holds,
            Some(t) => SideOutcome::Fails {
                path: conclusion_path(b, m),
                expected: "a value".into(),
                found: t.describe(),
                message: format!("Expected a value, but found {}.", t.describe()),
            },
        },
    }
}

/// Decides a side condition under `b`, binding a lookup's result if it was
/// still unbound.
pub fn check_side_condition(c: &SideCond, b: &mut Bindings, style: CtxStyle) -> TriBool {
    match eval_side_condition(c, 0, b, style) {
        SideOutcome::Holds => TriBool::Yes,
        SideOutcome::Unknown(holes) if holes.is_empty() => TriBool::Unknown(vec![Path::root()]),
        SideOutcome::Unknown(holes) => TriBool::Unknown(holes),
        SideOutcome::Fails { path, .. } => TriBool::No(path),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textio::parse_judgment;

    fn typing_env() -> crate::textio::MetaEnv {
        [
            ("Γ", Sort::Ctx),
            ("M", Sort::Expr),
            ("N", Sort::Expr),
            ("T", Sort::Type),
            ("x", Sort::Name),
            ("e", Sort::Expr),
            ("v", Sort::Value),
        ]
        .into_iter()
        .map(|(a, b)| (a.to_string(), b))
        .collect()
    }

    fn schema(text: &str, kind: JudgmentKind) -> Judgment {
        crate::textio::parse_schema(text, kind, &typing_env()).unwrap()
    }

    fn subject(text: &str) -> Judgment {
        parse_judgment(text, None).unwrap()
    }

    #[test]
    fn binds_all_metavariables() {
        let s = schema("Γ |- M + N : Num", JudgmentKind::Typing);
        let MatchResult::Matched(b) = match_schema(&s, &subject("[] |- 1 + 2 : Num"), &Bindings::new())
        else {
            panic!("expected a match");
        };
        assert_eq!(b.term("M"), Some(&Term::from(1)));
        assert_eq!(b.term("Γ"), Some(&Term::Ctx(vec![])));
        assert_eq!(instantiate(&s, &b), subject("[] |- 1 + 2 : Num"));
    }

    #[test]
    fn head_mismatch_is_described() {
        let s = schema("Γ |- M + N : Num", JudgmentKind::Typing);
        let r = match_schema(&s, &subject("[] |- true : Num"), &Bindings::new());
        let MatchResult::Mismatch(ms) = r else { panic!() };
        assert_eq!(ms[0].path, Path(vec![1]));
        assert_eq!(ms[0].message(), "Expected an addition, but found a boolean literal.");
    }

    #[test]
    fn hole_blocks() {
        let s = schema("Γ |- M + N : Num", JudgmentKind::Typing);
        let r = match_schema(&s, &subject("[] |- ? : Num"), &Bindings::new());
        assert_eq!(r, MatchResult::Blocked(vec![Path(vec![1])]));
    }

    #[test]
    fn mismatch_beats_hole() {
        let s = schema("Γ |- M + N : Num", JudgmentKind::Typing);
        let r = match_schema(&s, &subject("? |- 1 + 2 : Bool"), &Bindings::new());
        assert!(matches!(r, MatchResult::Mismatch(_)));
    }

    #[test]
    fn context_splice_takes_the_prefix() {
        let s = schema("[Γ, x:T] |- e : T", JudgmentKind::Typing);
        let r = match_schema(&s, &subject("[a:Bool, b:Num] |- b : Num"), &Bindings::new());
        let MatchResult::Matched(b) = r else { panic!("{r:?}") };
        assert_eq!(b.term("Γ"), Some(&Term::Ctx(vec![Term::decl("a", Term::TBool)])));
        let r = match_schema(&s, &subject("[] |- b : Num"), &Bindings::new());
        let MatchResult::Mismatch(ms) = r else { panic!() };
        assert_eq!(ms[0].expected, "a context with at least 1 entry");
    }

    #[test]
    fn value_sort_is_enforced() {
        let s = schema("v evalto v", JudgmentKind::Eval);
        let r = match_schema(&s, &subject("1 + 2 evalto 1 + 2"), &Bindings::new());
        let MatchResult::Mismatch(ms) = r else { panic!() };
        assert_eq!(ms[0].expected, "a value");
    }

    #[test]
    fn substitution_computed_once_bound() {
        let s = schema("[v/x]e evalto v", JudgmentKind::Eval);
        let mut seed = Bindings::new();
        let o = || Origin {
            locus: Locus::Premise(0),
            path: Path::root(),
        };
        seed.insert("x", Term::var("y"), o());
        seed.insert("e", Term::plus(Term::var("y"), 1.into()), o());
        seed.insert("v", 4.into(), o());
        let r = match_schema(&s, &subject("4 + 1 evalto 4"), &seed);
        assert!(matches!(r, MatchResult::Matched(_)));
        let r = match_schema(&s, &subject("4 + 2 evalto 4"), &seed);
        let MatchResult::Mismatch(ms) = r else { panic!() };
        assert_eq!(ms[0].path, Path(vec![0, 1]));
    }

    #[test]
    fn arithmetic_side_condition() {
        let o = Origin {
            locus: Locus::Conclusion,
            path: Path(vec![1]),
        };
        let mut b = Bindings::new();
        b.insert("n", 4.into(), o.clone());
        b.insert("n1", 1.into(), o.clone());
        b.insert("n2", 2.into(), o);
        let c = SideCond::Arith {
            result: "n".into(),
            left: "n1".into(),
            right: "n2".into(),
        };
        let SideOutcome::Fails { message, path, .. } = eval_side_condition(&c, 0, &mut b, CtxStyle::Typing)
        else {
            panic!()
        };
        assert_eq!(message, "Expected `3` (1 + 2), but found `4`.");
        assert_eq!(path, Path(vec![1]));
    }
}
