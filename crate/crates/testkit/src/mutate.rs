//! Single-node corruptions of correct derivations, applied through the
//! public edit commands so node ids stay put. Each one leaves the
//! derivation invalid.

use deriver_core::document::{apply_edit, DerivationDoc, EditCommand, NodeId, RuleRef};
use deriver_core::term::{subterm_at, Path, Sort, Term};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::alfa::judgment_holds;
use crate::gen::{hole_paths, judgment_paths};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    WrongRule,
    ChangedType,
    ChangedLiteral,
}

/// A different type of the same position.
fn other_type(t: &Term) -> Term {
    match t {
        Term::TNum => Term::TBool,
        _ => Term::TNum,
    }
}

fn other_literal(t: &Term) -> Option<Term> {
    match t {
        Term::Num(n) => Some(Term::Num(n + 1)),
        Term::Bool(b) => Some(Term::Bool(!b)),
        _ => None,
    }
}

/// Applies one mutation of the requested kind at a random node where it is
/// possible. Returns the edited document and the node that was changed.
pub fn mutate(rng: &mut impl Rng, doc: &DerivationDoc, kind: Mutation) -> Option<(DerivationDoc, NodeId)> {
    let mut candidates: Vec<(NodeId, EditCommand)> = Vec::new();
    for n in doc.nodes() {
        match kind {
            Mutation::WrongRule => {
                let current = match &n.rule {
                    RuleRef::Rule(r) => Some(r.as_str()),
                    _ => None,
                };
                let others: Vec<&str> = doc
                    .system
                    .rules
                    .iter()
                    .map(|r| r.name.as_str())
                    .filter(|r| Some(*r) != current)
                    .collect();
                let rule = others.choose(rng)?.to_string();
                candidates.push((n.id, EditCommand::SetRule { node: n.id, rule }));
            }
            Mutation::ChangedType | Mutation::ChangedLiteral => {
                for p in judgment_paths(&n.judgment) {
                    let sub = subterm_at(&n.judgment, &p).ok()?;
                    let term = match kind {
                        Mutation::ChangedType if n.judgment.sort_at(&p) == Ok(Sort::Type) => {
                            other_type(sub)
                        }
                        Mutation::ChangedLiteral => match other_literal(sub) {
                            Some(t) => t,
                            None => continue,
                        },
                        _ => continue,
                    };
                    candidates.push((
                        n.id,
                        EditCommand::EditJudgment {
                            node: n.id,
                            path: p,
                            term,
                        },
                    ));
                }
            }
        }
    }
    // A judgment edit at the root can produce another true statement (say
    // `1 : Num` to `2 : Num`); those are not corruptions. Deeper edits always
    // disagree with the parent's instantiated premise.
    let root = doc.root.id;
    candidates.retain(|(id, cmd)| match cmd {
        EditCommand::EditJudgment { .. } if *id == root => apply_edit(doc, cmd)
            .map(|d| judgment_holds(&d.root.judgment) == Some(false))
            .unwrap_or(false),
        _ => true,
    });
    let (id, cmd) = candidates.choose(rng)?.clone();
    Some((apply_edit(doc, &cmd).ok()?, id))
}

/// Replaces one random hole-admitting subterm of one random node with a
/// hole.
pub fn punch_hole(rng: &mut impl Rng, doc: &DerivationDoc) -> Option<(DerivationDoc, NodeId, Path)> {
    let nodes = doc.nodes();
    let n = nodes.choose(rng)?;
    let path = hole_paths(&n.judgment).choose(rng)?.clone();
    let cmd = EditCommand::MakeHole {
        node: n.id,
        path: path.clone(),
    };
    Some((apply_edit(doc, &cmd).ok()?, n.id, path))
}
