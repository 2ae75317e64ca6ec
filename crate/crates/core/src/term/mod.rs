//! Unified term and judgment representation.
//!
//! Expressions, types, propositions and contexts share one [`Term`] tree so
//! that paths, holes and three-valued comparison work the same way across
//! all three rule systems. Binder names (`fun x`, `let x`, `x : T` context
//! entries) are stored as `Var` subterms so every name has a path.

mod ctx;
mod eq;
mod sort;
mod subst;

use std::fmt;

use num_bigint::BigInt;

pub use ctx::{ctx_lookup, LookupResult};
pub use eq::{eq3, eq3_judgment, TriBool};
pub use sort::{check_judgment_sorts, check_sort, CtxStyle, Sort, SortError};
pub use subst::{free_vars, substitute, SubstError};

pub type Name = String;

/// A metavariable occurrence inside a rule schema.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Metavar {
    pub name: Name,
    pub sort: Sort,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Name),
    Num(BigInt),
    Bool(bool),
    Plus(Box<Term>, Box<Term>),
    If(Box<Term>, Box<Term>, Box<Term>),
    /// `fun x : T -> e` as (binder, annotation, body).
    Fun(Box<Term>, Box<Term>, Box<Term>),
    App(Box<Term>, Box<Term>),
    /// `let x = e1 in e2` as (binder, bound, body).
    Let(Box<Term>, Box<Term>, Box<Term>),

    TNum,
    TBool,
    TArrow(Box<Term>, Box<Term>),

    Atom(Name),
    And(Box<Term>, Box<Term>),
    Or(Box<Term>, Box<Term>),
    Implies(Box<Term>, Box<Term>),
    Not(Box<Term>),
    Falsum,

    /// Ordered context; rightmost entry shadows.
    Ctx(Vec<Term>),
    /// Typing context entry `x : T`.
    Decl(Box<Term>, Box<Term>),

    Hole,
    Abbrev(Name),
    /// Pending substitution `[v/x]e`, stored as (e, x, v).
    Subst(Box<Term>, Box<Term>, Box<Term>),
    Meta(Metavar),
}

fn bx(t: Term) -> Box<Term> {
    Box::new(t)
}

impl Term {
    pub fn var(name: impl Into<Name>) -> Term {
        Term::Var(name.into())
    }

    pub fn num(n: impl Into<BigInt>) -> Term {
        Term::Num(n.into())
    }

    pub fn plus(a: Term, b: Term) -> Term {
        Term::Plus(bx(a), bx(b))
    }

    pub fn if_(c: Term, t: Term, e: Term) -> Term {
        Term::If(bx(c), bx(t), bx(e))
    }

    pub fn fun(x: impl Into<Name>, ty: Term, body: Term) -> Term {
        Term::Fun(bx(Term::Var(x.into())), bx(ty), bx(body))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(bx(f), bx(a))
    }

    pub fn let_(x: impl Into<Name>, bound: Term, body: Term) -> Term {
        Term::Let(bx(Term::Var(x.into())), bx(bound), bx(body))
    }

    pub fn arrow(a: Term, b: Term) -> Term {
        Term::TArrow(bx(a), bx(b))
    }

    pub fn atom(name: impl Into<Name>) -> Term {
        Term::Atom(name.into())
    }

    pub fn and(a: Term, b: Term) -> Term {
        Term::And(bx(a), bx(b))
    }

    pub fn or(a: Term, b: Term) -> Term {
        Term::Or(bx(a), bx(b))
    }

    pub fn implies(a: Term, b: Term) -> Term {
        Term::Implies(bx(a), bx(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Term) -> Term {
        Term::Not(bx(a))
    }

    pub fn decl(x: impl Into<Name>, ty: Term) -> Term {
        Term::Decl(bx(Term::Var(x.into())), bx(ty))
    }

    pub fn subst(body: Term, x: Term, v: Term) -> Term {
        Term::Subst(bx(body), bx(x), bx(v))
    }

    pub fn meta(name: impl Into<Name>, sort: Sort) -> Term {
        Term::Meta(Metavar {
            name: name.into(),
            sort,
        })
    }

    pub fn children(&self) -> Vec<&Term> {
        use Term::*;
        match self {
            Var(_) | Num(_) | Bool(_) | TNum | TBool | Atom(_) | Falsum | Hole | Abbrev(_)
            | Meta(_) => Vec::new(),
            Plus(a, b) | App(a, b) | TArrow(a, b) | And(a, b) | Or(a, b) | Implies(a, b)
            | Decl(a, b) => vec![a, b],
            If(a, b, c) | Fun(a, b, c) | Let(a, b, c) | Subst(a, b, c) => vec![a, b, c],
            Not(a) => vec![a],
            Ctx(entries) => entries.iter().collect(),
        }
    }

    pub fn child(&self, index: usize) -> Option<&Term> {
        self.children().get(index).copied()
    }

    pub fn child_mut(&mut self, index: usize) -> Option<&mut Term> {
        use Term::*;
        match self {
            Var(_) | Num(_) | Bool(_) | TNum | TBool | Atom(_) | Falsum | Hole | Abbrev(_)
            | Meta(_) => None,
            Plus(a, b) | App(a, b) | TArrow(a, b) | And(a, b) | Or(a, b) | Implies(a, b)
            | Decl(a, b) => match index {
                0 => Some(a),
                1 => Some(b),
                _ => None,
            },
            If(a, b, c) | Fun(a, b, c) | Let(a, b, c) | Subst(a, b, c) => match index {
                0 => Some(a),
                1 => Some(b),
                2 => Some(c),
                _ => None,
            },
            Not(a) => (index == 0).then_some(&mut **a),
            Ctx(entries) => entries.get_mut(index),
        }
    }

    /// Same constructor, same leaf payload and, for contexts, same length.
    pub fn same_head(&self, other: &Term) -> bool {
        use Term::*;
        match (self, other) {
            (Var(a), Var(b)) | (Atom(a), Atom(b)) | (Abbrev(a), Abbrev(b)) => a == b,
            (Num(a), Num(b)) => a == b,
            (Bool(a), Bool(b)) => a == b,
            (Meta(a), Meta(b)) => a == b,
            (Ctx(a), Ctx(b)) => a.len() == b.len(),
            _ => std::mem::discriminant(self) == std::mem::discriminant(other),
        }
    }

    pub fn is_hole(&self) -> bool {
        matches!(self, Term::Hole)
    }

    /// Paths (relative to this term) of every `Hole` inside it.
    pub fn hole_paths(&self) -> Vec<Path> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        collect_holes(self, &mut cur, &mut out);
        out
    }

    pub fn has_holes(&self) -> bool {
        match self {
            Term::Hole => true,
            _ => self.children().into_iter().any(Term::has_holes),
        }
    }

    pub fn has_metas(&self) -> bool {
        match self {
            Term::Meta(_) => true,
            _ => self.children().into_iter().any(Term::has_metas),
        }
    }

    pub fn has_abbrevs(&self) -> bool {
        match self {
            Term::Abbrev(_) => true,
            _ => self.children().into_iter().any(Term::has_abbrevs),
        }
    }

    /// Syntactic values of the evaluation system.
    pub fn is_value(&self) -> bool {
        matches!(self, Term::Num(_) | Term::Bool(_) | Term::Fun(..))
    }

    pub fn at(&self, path: &[usize]) -> Option<&Term> {
        let mut t = self;
        for &i in path {
            t = t.child(i)?;
        }
        Some(t)
    }

    pub fn at_mut(&mut self, path: &[usize]) -> Option<&mut Term> {
        let mut t = self;
        for &i in path {
            t = t.child_mut(i)?;
        }
        Some(t)
    }

    /// Binder name if this is a `Var`.
    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(x) => Some(x),
            _ => None,
        }
    }

    /// Short description of the head constructor, used in diagnostics.
    pub fn describe(&self) -> String {
        use Term::*;
        match self {
            Var(_) => "a variable".into(),
            Num(_) => "an integer literal".into(),
            Bool(_) => "a boolean literal".into(),
            Plus(..) => "an addition".into(),
            If(..) => "an if-expression".into(),
            Fun(..) => "a function term".into(),
            App(..) => "an application".into(),
            Let(..) => "a let-expression".into(),
            TNum => "type Num".into(),
            TBool => "type Bool".into(),
            TArrow(..) => "a function type".into(),
            Atom(_) => "an atomic proposition".into(),
            And(..) => "a conjunction".into(),
            Or(..) => "a disjunction".into(),
            Implies(..) => "an implication".into(),
            Not(_) => "a negation".into(),
            Falsum => "falsehood".into(),
            Ctx(entries) => match entries.len() {
                0 => "an empty context".into(),
                1 => "a context with 1 entry".into(),
                n => format!("a context with {n} entries"),
            },
            Decl(..) => "a variable declaration".into(),
            Hole => "a hole".into(),
            Abbrev(n) => format!("abbreviation ${n}"),
            Subst(..) => "a substitution".into(),
            Meta(m) => format!("metavariable {}", m.name),
        }
    }
}

fn collect_holes(t: &Term, cur: &mut Vec<usize>, out: &mut Vec<Path>) {
    if t.is_hole() {
        out.push(Path(cur.clone()));
        return;
    }
    for (i, c) in t.children().into_iter().enumerate() {
        cur.push(i);
        collect_holes(c, cur, out);
        cur.pop();
    }
}

impl From<i64> for Term {
    fn from(n: i64) -> Term {
        Term::Num(n.into())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum JudgmentKind {
    Typing,
    Eval,
    Entail,
}

impl JudgmentKind {
    /// Slot index of the synthesized result (type or value), if any.
    pub fn output_slot(self) -> Option<usize> {
        match self {
            JudgmentKind::Typing => Some(2),
            JudgmentKind::Eval => Some(1),
            JudgmentKind::Entail => None,
        }
    }

    pub fn slot_sorts(self) -> &'static [Sort] {
        match self {
            JudgmentKind::Typing => &[Sort::Ctx, Sort::Expr, Sort::Type],
            JudgmentKind::Eval => &[Sort::Expr, Sort::Expr],
            JudgmentKind::Entail => &[Sort::Ctx, Sort::Prop],
        }
    }

    pub fn ctx_style(self) -> CtxStyle {
        match self {
            JudgmentKind::Entail => CtxStyle::Logic,
            _ => CtxStyle::Typing,
        }
    }

    /// The judgment with every slot a hole.
    pub fn skeleton(self) -> Judgment {
        match self {
            JudgmentKind::Typing => Judgment::Typing {
                ctx: Term::Hole,
                expr: Term::Hole,
                ty: Term::Hole,
            },
            JudgmentKind::Eval => Judgment::Eval {
                expr: Term::Hole,
                value: Term::Hole,
            },
            JudgmentKind::Entail => Judgment::Entail {
                ctx: Term::Hole,
                prop: Term::Hole,
            },
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            JudgmentKind::Typing => "a typing judgment",
            JudgmentKind::Eval => "an evaluation judgment",
            JudgmentKind::Entail => "an entailment judgment",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Judgment {
    Typing { ctx: Term, expr: Term, ty: Term },
    Eval { expr: Term, value: Term },
    Entail { ctx: Term, prop: Term },
    /// The entire judgment is a hole.
    Hole,
}

impl Judgment {
    pub fn typing(ctx: Term, expr: Term, ty: Term) -> Judgment {
        Judgment::Typing { ctx, expr, ty }
    }

    pub fn eval(expr: Term, value: Term) -> Judgment {
        Judgment::Eval { expr, value }
    }

    pub fn entail(ctx: Term, prop: Term) -> Judgment {
        Judgment::Entail { ctx, prop }
    }

    pub fn kind(&self) -> Option<JudgmentKind> {
        match self {
            Judgment::Typing { .. } => Some(JudgmentKind::Typing),
            Judgment::Eval { .. } => Some(JudgmentKind::Eval),
            Judgment::Entail { .. } => Some(JudgmentKind::Entail),
            Judgment::Hole => None,
        }
    }

    pub fn slots(&self) -> Vec<&Term> {
        match self {
            Judgment::Typing { ctx, expr, ty } => vec![ctx, expr, ty],
            Judgment::Eval { expr, value } => vec![expr, value],
            Judgment::Entail { ctx, prop } => vec![ctx, prop],
            Judgment::Hole => Vec::new(),
        }
    }

    pub fn slot_mut(&mut self, index: usize) -> Option<&mut Term> {
        match (self, index) {
            (Judgment::Typing { ctx, .. }, 0) => Some(ctx),
            (Judgment::Typing { expr, .. }, 1) => Some(expr),
            (Judgment::Typing { ty, .. }, 2) => Some(ty),
            (Judgment::Eval { expr, .. }, 0) => Some(expr),
            (Judgment::Eval { value, .. }, 1) => Some(value),
            (Judgment::Entail { ctx, .. }, 0) => Some(ctx),
            (Judgment::Entail { prop, .. }, 1) => Some(prop),
            _ => None,
        }
    }

    pub fn map_slots(&self, mut f: impl FnMut(&Term) -> Term) -> Judgment {
        match self {
            Judgment::Typing { ctx, expr, ty } => Judgment::Typing {
                ctx: f(ctx),
                expr: f(expr),
                ty: f(ty),
            },
            Judgment::Eval { expr, value } => Judgment::Eval {
                expr: f(expr),
                value: f(value),
            },
            Judgment::Entail { ctx, prop } => Judgment::Entail {
                ctx: f(ctx),
                prop: f(prop),
            },
            Judgment::Hole => Judgment::Hole,
        }
    }

    pub fn is_hole(&self) -> bool {
        matches!(self, Judgment::Hole)
    }

    pub fn has_holes(&self) -> bool {
        match self {
            Judgment::Hole => true,
            j => j.slots().into_iter().any(Term::has_holes),
        }
    }

    /// Paths of every hole, including `[]` for a judgment hole.
    pub fn hole_paths(&self) -> Vec<Path> {
        if self.is_hole() {
            return vec![Path::root()];
        }
        let mut out = Vec::new();
        for (i, slot) in self.slots().into_iter().enumerate() {
            out.extend(slot.hole_paths().into_iter().map(|p| p.prefixed(i)));
        }
        out
    }

    pub fn has_abbrevs(&self) -> bool {
        self.slots().into_iter().any(Term::has_abbrevs)
    }

    /// Sort required at `path` (which must be non-empty).
    pub fn sort_at(&self, path: &Path) -> Result<Sort, PathError> {
        let kind = self
            .kind()
            .ok_or_else(|| PathError::OutOfRange(path.clone(), Path::root()))?;
        let (&first, rest) = path
            .0
            .split_first()
            .ok_or(PathError::JudgmentRoot)?;
        let mut sort = *kind
            .slot_sorts()
            .get(first)
            .ok_or_else(|| PathError::OutOfRange(path.clone(), Path(vec![first])))?;
        let slots = self.slots();
        let mut t: &Term = slots[first];
        for (depth, &i) in rest.iter().enumerate() {
            let prefix = Path(path.0[..depth + 2].to_vec());
            sort = sort::child_sort(t, i, kind.ctx_style())
                .ok_or_else(|| PathError::OutOfRange(path.clone(), prefix.clone()))?;
            t = t
                .child(i)
                .ok_or_else(|| PathError::OutOfRange(path.clone(), prefix))?;
        }
        Ok(sort)
    }
}

/// Child indices from a judgment root; the first step selects a slot.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path(pub Vec<usize>);

impl Path {
    pub fn root() -> Path {
        Path(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, i: usize) -> Path {
        let mut v = self.0.clone();
        v.push(i);
        Path(v)
    }

    pub fn prefixed(&self, i: usize) -> Path {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(i);
        v.extend_from_slice(&self.0);
        Path(v)
    }

    pub fn join(&self, rest: &Path) -> Path {
        let mut v = self.0.clone();
        v.extend_from_slice(&rest.0);
        Path(v)
    }

    pub fn starts_with(&self, prefix: &Path) -> bool {
        self.0.starts_with(&prefix.0)
    }
}

impl From<Vec<usize>> for Path {
    fn from(v: Vec<usize>) -> Path {
        Path(v)
    }
}

impl From<&[usize]> for Path {
    fn from(v: &[usize]) -> Path {
        Path(v.to_vec())
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

impl serde::Serialize for Path {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PathError {
    #[error("path {0} is out of range (no subterm at {1})")]
    OutOfRange(Path, Path),
    #[error("the empty path denotes the whole judgment, not a term")]
    JudgmentRoot,
}

pub fn subterm_at<'a>(j: &'a Judgment, p: &Path) -> Result<&'a Term, PathError> {
    let (&first, rest) = p.0.split_first().ok_or(PathError::JudgmentRoot)?;
    let slots = j.slots();
    let mut t = *slots
        .get(first)
        .ok_or_else(|| PathError::OutOfRange(p.clone(), Path(vec![first])))?;
    for (depth, &i) in rest.iter().enumerate() {
        t = t
            .child(i)
            .ok_or_else(|| PathError::OutOfRange(p.clone(), Path(p.0[..depth + 2].to_vec())))?;
    }
    Ok(t)
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ReplaceError {
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Sort(#[from] SortError),
}

/// Persistent replacement: returns a new judgment, `j` is untouched.
pub fn replace_at(j: &Judgment, p: &Path, t: Term) -> Result<Judgment, ReplaceError> {
    subterm_at(j, p)?;
    let sort = j.sort_at(p)?;
    let style = j.kind().map(JudgmentKind::ctx_style).unwrap_or(CtxStyle::Typing);
    check_sort(&t, sort, style).map_err(|e| e.under(p))?;
    let mut out = j.clone();
    let (&first, rest) = p.0.split_first().expect("non-empty path checked above");
    let slot = out.slot_mut(first).expect("slot checked above");
    *slot.at_mut(rest).expect("path checked above") = t;
    Ok(out)
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::textio::print_term(self))
    }
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::textio::print_judgment(self))
    }
}
