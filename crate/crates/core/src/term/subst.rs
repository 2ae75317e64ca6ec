use std::collections::BTreeSet;

use super::{Name, Term};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SubstError {
    #[error("substituted term must be closed and hole-free, found {0}")]
    OpenValue(String),
}

/// Free expression variables of `t`.
pub fn free_vars(t: &Term) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    collect_free(t, &mut Vec::new(), &mut out);
    out
}

fn collect_free(t: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    match t {
        Term::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        Term::Fun(x, ty, body) => {
            collect_free(ty, bound, out);
            with_binder(x, bound, |bound| collect_free(body, bound, out));
        }
        Term::Let(x, e1, e2) => {
            collect_free(e1, bound, out);
            with_binder(x, bound, |bound| collect_free(e2, bound, out));
        }
        _ => {
            for c in t.children() {
                collect_free(c, bound, out);
            }
        }
    }
}

fn with_binder(x: &Term, bound: &mut Vec<Name>, f: impl FnOnce(&mut Vec<Name>)) {
    match x.as_var() {
        Some(name) => {
            bound.push(name.to_string());
            f(bound);
            bound.pop();
        }
        None => f(bound),
    }
}

/// Capture-avoiding substitution `[v/x]body` for a closed, hole-free `v`.
///
/// Because `v` is closed no renaming is ever needed; binders of `x` shadow.
pub fn substitute(body: &Term, x: &str, v: &Term) -> Result<Term, SubstError> {
    if v.has_holes() || v.has_metas() || v.has_abbrevs() || !free_vars(v).is_empty() {
        return Err(SubstError::OpenValue(v.to_string()));
    }
    Ok(subst_closed(body, x, v))
}

fn subst_closed(t: &Term, x: &str, v: &Term) -> Term {
    match t {
        Term::Var(y) if y == x => v.clone(),
        Term::Fun(b, ty, body) => {
            let ty = subst_closed(ty, x, v);
            let body = if b.as_var() == Some(x) {
                (**body).clone()
            } else {
                subst_closed(body, x, v)
            };
            Term::Fun(b.clone(), Box::new(ty), Box::new(body))
        }
        Term::Let(b, e1, e2) => {
            let e1 = subst_closed(e1, x, v);
            let e2 = if b.as_var() == Some(x) {
                (**e2).clone()
            } else {
                subst_closed(e2, x, v)
            };
            Term::Let(b.clone(), Box::new(e1), Box::new(e2))
        }
        _ => {
            let mut out = t.clone();
            for i in 0..t.children().len() {
                let new = subst_closed(t.child(i).expect("index in range"), x, v);
                *out.child_mut(i).expect("index in range") = new;
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replaces_free_occurrences() {
        let body = Term::plus(Term::var("x"), 1.into());
        assert_eq!(substitute(&body, "x", &2.into()), Ok(Term::plus(2.into(), 1.into())));
    }

    #[test]
    fn binder_shadows() {
        let body = Term::fun("x", Term::TNum, Term::var("x"));
        assert_eq!(substitute(&body, "x", &5.into()), Ok(body.clone()));
    }

    #[test]
    fn let_bound_expression_is_outside_the_binder() {
        let body = Term::let_(
            "y",
            Term::var("x"),
            Term::plus(Term::var("x"), Term::var("y")),
        );
        let want = Term::let_("y", 3.into(), Term::plus(3.into(), Term::var("y")));
        assert_eq!(substitute(&body, "x", &3.into()), Ok(want));

        let shadow = Term::let_("x", Term::var("x"), Term::var("x"));
        assert_eq!(
            substitute(&shadow, "x", &3.into()),
            Ok(Term::let_("x", 3.into(), Term::var("x")))
        );
    }

    #[test]
    fn open_or_holey_values_are_rejected() {
        let body = Term::var("x");
        assert!(substitute(&body, "x", &Term::var("z")).is_err());
        assert!(substitute(&body, "x", &Term::Hole).is_err());
        let closed = Term::fun("z", Term::TNum, Term::var("z"));
        assert_eq!(substitute(&body, "x", &closed), Ok(closed.clone()));
    }

    #[test]
    fn holes_in_body_survive() {
        let body = Term::plus(Term::var("x"), Term::Hole);
        assert_eq!(
            substitute(&body, "x", &1.into()),
            Ok(Term::plus(1.into(), Term::Hole))
        );
    }

    #[test]
    fn free_variable_sets() {
        let t = Term::fun("x", Term::TNum, Term::plus(Term::var("x"), Term::var("y")));
        assert_eq!(free_vars(&t).into_iter().collect::<Vec<_>>(), vec!["y".to_string()]);
    }
}
