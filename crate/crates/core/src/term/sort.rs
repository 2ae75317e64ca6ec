use std::fmt;

use super::{Judgment, Path, Term};

/// Syntactic sort of a term position or metavariable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sort {
    Expr,
    /// Expression restricted to syntactic values (literals and functions).
    Value,
    /// Integer literal.
    Num,
    Type,
    Prop,
    Ctx,
    /// Variable name in binder or lookup position.
    Name,
    /// One entry of a typing context (`x : T`).
    Entry,
}

impl Sort {
    pub fn describe(self) -> &'static str {
        match self {
            Sort::Expr => "an expression",
            Sort::Value => "a value",
            Sort::Num => "an integer literal",
            Sort::Type => "a type",
            Sort::Prop => "a proposition",
            Sort::Ctx => "a context",
            Sort::Name => "a variable name",
            Sort::Entry => "a context entry",
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Sort::Expr => "expr",
            Sort::Value => "value",
            Sort::Num => "num",
            Sort::Type => "type",
            Sort::Prop => "prop",
            Sort::Ctx => "ctx",
            Sort::Name => "name",
            Sort::Entry => "entry",
        }
    }

    /// Whether a concrete (metavariable-free) term may be bound to a
    /// metavariable of this sort.
    pub fn admits(self, t: &Term, style: CtxStyle) -> bool {
        match self {
            Sort::Value => check_sort(t, Sort::Expr, style).is_ok() && t.is_value(),
            Sort::Num => matches!(t, Term::Num(_)),
            Sort::Name => matches!(t, Term::Var(_)),
            s => check_sort(t, s, style).is_ok(),
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Shape of context entries: `x : T` declarations or propositions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CtxStyle {
    Typing,
    Logic,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("expected {} at {path}, found {found}", expected.describe())]
pub struct SortError {
    pub path: Path,
    pub expected: Sort,
    pub found: String,
}

impl SortError {
    pub fn under(mut self, prefix: &Path) -> SortError {
        self.path = prefix.join(&self.path);
        self
    }
}

/// Sort required of child `i` of `t`, or `None` if `t` has no such child.
pub(crate) fn child_sort(t: &Term, i: usize, style: CtxStyle) -> Option<Sort> {
    use Term::*;
    let s = match (t, i) {
        (Plus(..) | App(..), 0 | 1) | (If(..), 0..=2) => Sort::Expr,
        (Fun(..) | Let(..) | Decl(..), 0) => Sort::Name,
        (Fun(..) | Decl(..), 1) => Sort::Type,
        (Fun(..), 2) | (Let(..), 1 | 2) => Sort::Expr,
        (TArrow(..), 0 | 1) => Sort::Type,
        (And(..) | Or(..) | Implies(..), 0 | 1) | (Not(_), 0) => Sort::Prop,
        (Subst(..), 0 | 2) => Sort::Expr,
        (Subst(..), 1) => Sort::Name,
        (Ctx(entries), i) if i < entries.len() => match style {
            CtxStyle::Typing => Sort::Entry,
            CtxStyle::Logic => Sort::Prop,
        },
        _ => return None,
    };
    Some(s)
}

fn meta_fits(m: Sort, want: Sort) -> bool {
    match want {
        Sort::Expr | Sort::Value => matches!(m, Sort::Expr | Sort::Value | Sort::Num | Sort::Name),
        Sort::Num => m == Sort::Num,
        other => m == other,
    }
}

/// Well-formedness predicate: does `t` belong to sort `sort`?
///
/// Holes and abbreviations are accepted in every non-name position; the
/// expansion of an abbreviation is checked separately by the document.
pub fn check_sort(t: &Term, sort: Sort, style: CtxStyle) -> Result<(), SortError> {
    use Term::*;
    let fail = || {
        Err(SortError {
            path: Path::root(),
            expected: sort,
            found: t.describe(),
        })
    };
    let head_ok = match (sort, t) {
        (Sort::Name, Var(_)) => true,
        (Sort::Name, Meta(m)) => m.sort == Sort::Name,
        (Sort::Name, _) => false,
        (_, Hole | Abbrev(_)) => true,
        (_, Meta(m)) => {
            meta_fits(m.sort, sort) || (sort == Sort::Entry && m.sort == Sort::Ctx)
        }
        (Sort::Expr | Sort::Value, Var(_) | Num(_) | Bool(_) | Plus(..) | If(..) | Fun(..))
        | (Sort::Expr | Sort::Value, App(..) | Let(..) | Subst(..)) => true,
        (Sort::Num, Num(_)) => true,
        (Sort::Type, TNum | TBool | TArrow(..)) => true,
        (Sort::Prop, Atom(_) | And(..) | Or(..) | Implies(..) | Not(_) | Falsum) => true,
        (Sort::Ctx, Ctx(_)) => true,
        (Sort::Entry, Decl(..)) => true,
        _ => false,
    };
    if !head_ok {
        return fail();
    }
    for (i, c) in t.children().into_iter().enumerate() {
        let want = child_sort(t, i, style).expect("child index within arity");
        // ctx-sorted metavariables splice into a context's entry list
        if matches!(t, Ctx(_)) && matches!(c, Meta(m) if m.sort == Sort::Ctx) {
            continue;
        }
        check_sort(c, want, style).map_err(|e| e.under(&Path(vec![i])))?;
    }
    Ok(())
}

/// Sort-checks every slot of a judgment against its own kind.
pub fn check_judgment_sorts(j: &Judgment) -> Result<(), SortError> {
    let Some(kind) = j.kind() else {
        return Ok(());
    };
    for (i, (slot, sort)) in j.slots().into_iter().zip(kind.slot_sorts()).enumerate() {
        check_sort(slot, *sort, kind.ctx_style()).map_err(|e| e.under(&Path(vec![i])))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn types_are_not_expressions() {
        let err = check_sort(&Term::TBool, Sort::Expr, CtxStyle::Typing).unwrap_err();
        assert_eq!(err.expected, Sort::Expr);
        assert!(check_sort(&Term::Hole, Sort::Type, CtxStyle::Typing).is_ok());
    }

    #[test]
    fn nested_errors_carry_paths() {
        let t = Term::fun("x", Term::var("y"), Term::var("x"));
        let err = check_sort(&t, Sort::Expr, CtxStyle::Typing).unwrap_err();
        assert_eq!(err.path, Path(vec![1]));
        assert_eq!(err.expected, Sort::Type);
    }

    #[test]
    fn binder_cannot_be_a_hole() {
        let t = Term::Fun(Box::new(Term::Hole), Box::new(Term::TNum), Box::new(Term::Hole));
        assert!(check_sort(&t, Sort::Expr, CtxStyle::Typing).is_err());
    }

    #[test]
    fn context_styles() {
        let typing = Term::Ctx(vec![Term::decl("x", Term::TNum), Term::Hole]);
        assert!(check_sort(&typing, Sort::Ctx, CtxStyle::Typing).is_ok());
        assert!(check_sort(&typing, Sort::Ctx, CtxStyle::Logic).is_err());
        let logic = Term::Ctx(vec![Term::atom("A"), Term::and(Term::atom("B"), Term::Hole)]);
        assert!(check_sort(&logic, Sort::Ctx, CtxStyle::Logic).is_ok());
        assert!(check_sort(&logic, Sort::Ctx, CtxStyle::Typing).is_err());
    }

    #[test]
    fn admits_values_and_numerals() {
        let f = Term::fun("x", Term::TNum, Term::var("x"));
        assert!(Sort::Value.admits(&f, CtxStyle::Typing));
        assert!(!Sort::Value.admits(&Term::plus(1.into(), 2.into()), CtxStyle::Typing));
        assert!(Sort::Num.admits(&Term::from(3), CtxStyle::Typing));
        assert!(!Sort::Num.admits(&Term::Bool(true), CtxStyle::Typing));
    }
}
