use super::{eq3, Path, Term, TriBool};

/// Result of looking a key up in a context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LookupResult {
    /// Typing: the type of the rightmost binding. Logic: the matching entry.
    Found(Term),
    Absent,
    /// Holes (paths relative to the context) that may hide the answer.
    Unknown(Vec<Path>),
}

/// Looks `key` up in `ctx`.
///
/// A `Var` key performs a typing lookup (rightmost binding wins); any other
/// key is a proposition searched for by three-valued equality.
pub fn ctx_lookup(ctx: &Term, key: &Term) -> LookupResult {
    let entries = match ctx {
        Term::Ctx(entries) => entries,
        Term::Hole => return LookupResult::Unknown(vec![Path::root()]),
        _ => return LookupResult::Absent,
    };
    match key {
        Term::Var(x) => lookup_var(entries, x),
        prop => lookup_prop(entries, prop),
    }
}

fn lookup_var(entries: &[Term], x: &str) -> LookupResult {
    for (i, entry) in entries.iter().enumerate().rev() {
        match entry {
            Term::Hole => return LookupResult::Unknown(vec![Path(vec![i])]),
            Term::Decl(name, ty) if name.as_var() == Some(x) => {
                let holes = ty.hole_paths();
                return if holes.is_empty() {
                    LookupResult::Found((**ty).clone())
                } else {
                    LookupResult::Unknown(
                        holes.into_iter().map(|h| h.prefixed(1).prefixed(i)).collect(),
                    )
                };
            }
            _ => {}
        }
    }
    LookupResult::Absent
}

fn lookup_prop(entries: &[Term], prop: &Term) -> LookupResult {
    let mut holes = Vec::new();
    for (i, entry) in entries.iter().enumerate() {
        match eq3(entry, prop) {
            TriBool::Yes => return LookupResult::Found(entry.clone()),
            TriBool::No(_) => {}
            TriBool::Unknown(hs) => holes.extend(hs.into_iter().map(|h| h.prefixed(i))),
        }
    }
    if holes.is_empty() {
        LookupResult::Absent
    } else {
        LookupResult::Unknown(holes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rightmost_binding_wins() {
        let ctx = Term::Ctx(vec![Term::decl("x", Term::TNum), Term::decl("x", Term::TBool)]);
        assert_eq!(ctx_lookup(&ctx, &Term::var("x")), LookupResult::Found(Term::TBool));
    }

    #[test]
    fn absent_variable() {
        let ctx = Term::Ctx(vec![Term::decl("x", Term::TNum)]);
        assert_eq!(ctx_lookup(&ctx, &Term::var("y")), LookupResult::Absent);
    }

    #[test]
    fn hole_entry_may_be_the_assumption() {
        let ctx = Term::Ctx(vec![Term::Hole, Term::atom("B")]);
        assert_eq!(
            ctx_lookup(&ctx, &Term::atom("A")),
            LookupResult::Unknown(vec![Path(vec![0])])
        );
        assert_eq!(
            ctx_lookup(&ctx, &Term::atom("B")),
            LookupResult::Found(Term::atom("B"))
        );
    }

    #[test]
    fn hole_right_of_binding_blocks_typing_lookup() {
        let ctx = Term::Ctx(vec![Term::decl("x", Term::TNum), Term::Hole]);
        assert!(matches!(ctx_lookup(&ctx, &Term::var("x")), LookupResult::Unknown(_)));
        let ctx = Term::Ctx(vec![Term::Hole, Term::decl("x", Term::TNum)]);
        assert_eq!(ctx_lookup(&ctx, &Term::var("x")), LookupResult::Found(Term::TNum));
    }

    #[test]
    fn holey_type_is_unknown() {
        let ctx = Term::Ctx(vec![Term::decl("x", Term::arrow(Term::Hole, Term::TNum))]);
        assert_eq!(
            ctx_lookup(&ctx, &Term::var("x")),
            LookupResult::Unknown(vec![Path(vec![0, 1, 0])])
        );
    }
}
