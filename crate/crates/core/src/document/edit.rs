//! The edit-command algebra. Every command is validated against the whole
//! resulting document; a rejected command leaves the input untouched.

use super::{expand_with, Definition, DerivNode, DerivationDoc, DocError, Feedback, NodeId, Owner, RuleRef, SubtreeDef};
use crate::term::{replace_at, subterm_at, Judgment, Path, PathError, ReplaceError, Term};
use crate::textio::is_identifier;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EditCommand {
    /// Applies a rule; on a node without rule or premises this also creates
    /// one hole premise per rule premise. Unknown names are accepted.
    SetRule { node: NodeId, rule: String },
    ClearRule { node: NodeId },
    /// Inserts a hole premise at `position` (default: last).
    AddPremise { node: NodeId, position: Option<usize> },
    RemovePremise { node: NodeId, position: usize },
    /// Replaces the subterm at `path`.
    EditJudgment { node: NodeId, path: Path, term: Term },
    SetJudgment { node: NodeId, judgment: Judgment },
    /// Like `EditJudgment`, but only where there is currently a hole.
    FillHole { node: NodeId, path: Path, term: Term },
    /// Replaces the subterm at `path` by a hole; the empty path clears the
    /// whole judgment.
    MakeHole { node: NodeId, path: Path },
    DefineAbbrev { name: String, term: Term },
    /// Removes the last abbreviation, if nothing mentions it.
    RemoveAbbrev { name: String },
    DefineSubtree { name: String },
    /// Removes the last subtree, if nothing references it.
    RemoveSubtree { name: String },
    InsertSubtreeRef { node: NodeId, subtree: String },
    SetFeedback { feedback: Feedback },
}

impl EditCommand {
    /// Node the command targets, if any.
    pub fn target(&self) -> Option<NodeId> {
        use EditCommand::*;
        match self {
            SetRule { node, .. }
            | ClearRule { node }
            | AddPremise { node, .. }
            | RemovePremise { node, .. }
            | EditJudgment { node, .. }
            | SetJudgment { node, .. }
            | FillHole { node, .. }
            | MakeHole { node, .. }
            | InsertSubtreeRef { node, .. } => Some(*node),
            DefineAbbrev { .. }
            | RemoveAbbrev { .. }
            | DefineSubtree { .. }
            | RemoveSubtree { .. }
            | SetFeedback { .. } => None,
        }
    }
}

fn replace_error(e: ReplaceError) -> DocError {
    match e {
        ReplaceError::Path(PathError::OutOfRange(path, prefix)) => DocError::BadPath {
            reason: format!("no subterm at {prefix}"),
            path,
        },
        ReplaceError::Path(PathError::JudgmentRoot) => DocError::BadPath {
            path: Path::root(),
            reason: "the empty path denotes the whole judgment".into(),
        },
        ReplaceError::Sort(e) => e.into(),
    }
}

fn check_name(name: &str) -> Result<(), DocError> {
    if is_identifier(name) {
        Ok(())
    } else {
        Err(DocError::IllegalEdit(format!("`{name}` is not a valid name")))
    }
}

/// Applies `cmd`, returning the new document. `doc` is never modified.
pub fn apply_edit(doc: &DerivationDoc, cmd: &EditCommand) -> Result<DerivationDoc, DocError> {
    let mut d = doc.clone();
    apply_in_place(&mut d, cmd)?;
    d.validate()?;
    Ok(d)
}

fn node(d: &DerivationDoc, id: NodeId) -> Result<&DerivNode, DocError> {
    d.node(id).ok_or(DocError::UnknownNode(id))
}

fn node_mut(d: &mut DerivationDoc, id: NodeId) -> Result<&mut DerivNode, DocError> {
    d.node_mut(id).ok_or(DocError::UnknownNode(id))
}

/// The judgment with its subterm at `path` replaced; a judgment hole is
/// first opened into the system's skeleton.
fn replaced(d: &DerivationDoc, j: &Judgment, path: &Path, t: Term) -> Result<Judgment, DocError> {
    let base = if j.is_hole() && !path.is_root() {
        d.system.kind.skeleton()
    } else {
        j.clone()
    };
    let out = replace_at(&base, path, t).map_err(replace_error)?;
    d.check_judgment(&out)?;
    Ok(out)
}

fn apply_in_place(d: &mut DerivationDoc, cmd: &EditCommand) -> Result<(), DocError> {
    use EditCommand::*;
    match cmd {
        SetRule { node: id, rule } => {
            // Names outside the system are kept, as in parsed files, so that
            // undo can restore them; they verify as incorrect.
            if rule.is_empty() || rule.contains(char::is_whitespace) || rule == "?" {
                return Err(DocError::IllegalEdit(format!("`{rule}` is not a rule name")));
            }
            let arity = d.system.rule(rule).map_or(0, |r| r.arity());
            let n = node(d, *id)?;
            let create = n.children.is_empty() && !matches!(n.rule, RuleRef::Rule(_));
            let fresh: Vec<NodeId> = if create {
                (0..arity).map(|_| d.fresh_id()).collect()
            } else {
                Vec::new()
            };
            let n = node_mut(d, *id)?;
            n.rule = RuleRef::Rule(rule.clone());
            n.children.extend(fresh.into_iter().map(DerivNode::hole));
        }
        ClearRule { node: id } => {
            node_mut(d, *id)?.rule = RuleRef::Hole;
        }
        AddPremise { node: id, position } => {
            let n = node(d, *id)?;
            if matches!(n.rule, RuleRef::Subtree(_)) {
                return Err(DocError::IllegalEdit(
                    "a subtree reference cannot have premises".into(),
                ));
            }
            let pos = position.unwrap_or(n.children.len());
            if pos > n.children.len() {
                return Err(DocError::IllegalEdit(format!(
                    "premise position {pos} is out of range"
                )));
            }
            let fresh = d.fresh_id();
            node_mut(d, *id)?.children.insert(pos, DerivNode::hole(fresh));
        }
        RemovePremise { node: id, position } => {
            let n = node_mut(d, *id)?;
            if *position >= n.children.len() {
                return Err(DocError::IllegalEdit(format!(
                    "node {id} has no premise {position}"
                )));
            }
            n.children.remove(*position);
        }
        EditJudgment { node: id, path, term } => {
            let j = replaced(d, &node(d, *id)?.judgment, path, term.clone())?;
            node_mut(d, *id)?.judgment = j;
        }
        FillHole { node: id, path, term } => {
            let cur = &node(d, *id)?.judgment;
            let is_hole = cur.is_hole()
                || subterm_at(cur, path)
                    .map_err(|e| replace_error(e.into()))?
                    .is_hole();
            if !is_hole {
                return Err(DocError::IllegalEdit(format!("there is no hole at {path}")));
            }
            let j = replaced(d, cur, path, term.clone())?;
            node_mut(d, *id)?.judgment = j;
        }
        MakeHole { node: id, path } => {
            let cur = &node(d, *id)?.judgment;
            let j = if path.is_root() {
                Judgment::Hole
            } else {
                replaced(d, cur, path, Term::Hole)?
            };
            node_mut(d, *id)?.judgment = j;
        }
        SetJudgment { node: id, judgment } => {
            node(d, *id)?;
            d.check_judgment(judgment)?;
            node_mut(d, *id)?.judgment = judgment.clone();
        }
        DefineAbbrev { name, term } => {
            check_name(name)?;
            if d.definition(name).is_some() {
                return Err(DocError::DuplicateName(name.clone()));
            }
            let expanded = expand_with(&d.prelude, term)?;
            d.prelude.push(Definition {
                name: name.clone(),
                term: term.clone(),
                expanded,
            });
        }
        RemoveAbbrev { name } => {
            match d.prelude.last() {
                Some(last) if &last.name == name => {}
                Some(_) if d.definition(name).is_some() => {
                    return Err(DocError::IllegalEdit(format!(
                        "only the last abbreviation can be removed, not `{name}`"
                    )))
                }
                _ => return Err(DocError::UnboundAbbrev(name.clone())),
            }
            if d.abbrev_in_use(name) {
                return Err(DocError::IllegalEdit(format!("`${name}` is still in use")));
            }
            d.prelude.pop();
        }
        DefineSubtree { name } => {
            check_name(name)?;
            if d.subtree_index(name).is_some() {
                return Err(DocError::DuplicateName(name.clone()));
            }
            let root = DerivNode::hole(d.fresh_id());
            d.subtrees.push(SubtreeDef {
                name: name.clone(),
                root,
            });
        }
        RemoveSubtree { name } => {
            match d.subtrees.last() {
                Some(last) if &last.name == name => {}
                Some(_) if d.subtree_index(name).is_some() => {
                    return Err(DocError::IllegalEdit(format!(
                        "only the last subtree can be removed, not `{name}`"
                    )))
                }
                _ => return Err(DocError::UnknownSubtree(name.clone())),
            }
            if !d.references_to(name).is_empty() {
                return Err(DocError::IllegalEdit(format!(
                    "subtree `{name}` is still referenced"
                )));
            }
            d.subtrees.pop();
        }
        InsertSubtreeRef { node: id, subtree } => {
            let idx = d
                .subtree_index(subtree)
                .ok_or_else(|| DocError::UnknownSubtree(subtree.clone()))?;
            match d.owner_of(*id) {
                None => return Err(DocError::UnknownNode(*id)),
                Some(Owner::Subtree(from)) if idx >= from => {
                    return Err(DocError::ForwardSubtreeRef {
                        from: d.subtrees[from].name.clone(),
                        to: subtree.clone(),
                    })
                }
                Some(_) => {}
            }
            let target = d.subtrees[idx].root.judgment.clone();
            let n = node_mut(d, *id)?;
            n.children.clear();
            n.rule = RuleRef::Subtree(subtree.clone());
            if n.judgment.is_hole() {
                n.judgment = target;
            }
        }
        SetFeedback { feedback } => d.feedback = *feedback,
    }
    Ok(())
}

/// Commands that undo `cmd` when applied, in order, to
/// `apply_edit(before, cmd)`. Recreated nodes get fresh ids.
pub fn inverse(before: &DerivationDoc, cmd: &EditCommand) -> Result<Vec<EditCommand>, DocError> {
    use EditCommand::*;
    let mut scratch = apply_edit(before, cmd)?;
    let mut out = Vec::new();
    let s = &mut scratch;
    let o = &mut out;
    match cmd {
        SetRule { node: id, .. } | ClearRule { node: id } => {
            let orig = node(before, *id)?.clone();
            let extra = node(s, *id)?.children.len() - orig.children.len();
            for _ in 0..extra {
                emit(s, o, RemovePremise { node: *id, position: orig.children.len() })?;
            }
            restore_rule(s, o, *id, &orig)?;
        }
        AddPremise { node: id, position } => {
            let len = node(before, *id)?.children.len();
            let position = position.unwrap_or(len);
            emit(s, o, RemovePremise { node: *id, position })?;
        }
        RemovePremise { node: id, position } => {
            let child = node(before, *id)?.children[*position].clone();
            emit(s, o, AddPremise { node: *id, position: Some(*position) })?;
            let fresh = node(s, *id)?.children[*position].id;
            rebuild(s, o, fresh, &child)?;
        }
        EditJudgment { node: id, .. }
        | FillHole { node: id, .. }
        | MakeHole { node: id, .. }
        | SetJudgment { node: id, .. } => {
            let judgment = node(before, *id)?.judgment.clone();
            emit(s, o, SetJudgment { node: *id, judgment })?;
        }
        DefineAbbrev { name, .. } => emit(s, o, RemoveAbbrev { name: name.clone() })?,
        RemoveAbbrev { name } => {
            let term = before.definition(name).expect("removal succeeded").term.clone();
            emit(s, o, DefineAbbrev { name: name.clone(), term })?;
        }
        DefineSubtree { name } => emit(s, o, RemoveSubtree { name: name.clone() })?,
        RemoveSubtree { name } => {
            let orig = before.resolve_subtree(name)?.root.clone();
            emit(s, o, DefineSubtree { name: name.clone() })?;
            let fresh = s.subtrees.last().expect("just defined").root.id;
            rebuild(s, o, fresh, &orig)?;
        }
        InsertSubtreeRef { node: id, .. } => {
            let orig = node(before, *id)?.clone();
            rebuild(s, o, *id, &orig)?;
        }
        SetFeedback { .. } => emit(s, o, SetFeedback { feedback: before.feedback })?,
    }
    Ok(out)
}

fn emit(s: &mut DerivationDoc, out: &mut Vec<EditCommand>, cmd: EditCommand) -> Result<(), DocError> {
    *s = apply_edit(s, &cmd)?;
    out.push(cmd);
    Ok(())
}

/// Sets rule `r` without leaving any auto-created premises behind.
fn set_rule_exact(s: &mut DerivationDoc, out: &mut Vec<EditCommand>, id: NodeId, r: &str) -> Result<(), DocError> {
    let before = node(s, id)?.children.len();
    emit(s, out, EditCommand::SetRule { node: id, rule: r.to_string() })?;
    let after = node(s, id)?.children.len();
    for _ in before..after {
        emit(s, out, EditCommand::RemovePremise { node: id, position: before })?;
    }
    Ok(())
}

/// Restores the rule of `id` to that of `orig`, leaving premises alone.
fn restore_rule(s: &mut DerivationDoc, out: &mut Vec<EditCommand>, id: NodeId, orig: &DerivNode) -> Result<(), DocError> {
    match &orig.rule {
        RuleRef::Hole => emit(s, out, EditCommand::ClearRule { node: id })?,
        RuleRef::Rule(r) => set_rule_exact(s, out, id, r)?,
        RuleRef::Subtree(name) => {
            emit(s, out, EditCommand::InsertSubtreeRef { node: id, subtree: name.clone() })?;
            if node(s, id)?.judgment != orig.judgment {
                let judgment = orig.judgment.clone();
                emit(s, out, EditCommand::SetJudgment { node: id, judgment })?;
            }
        }
    }
    Ok(())
}

/// Makes the premise-less node `id` equal to `orig` up to ids.
fn rebuild(s: &mut DerivationDoc, out: &mut Vec<EditCommand>, id: NodeId, orig: &DerivNode) -> Result<(), DocError> {
    if node(s, id)?.judgment != orig.judgment {
        let judgment = orig.judgment.clone();
        emit(s, out, EditCommand::SetJudgment { node: id, judgment })?;
    }
    if let RuleRef::Subtree(_) = orig.rule {
        return restore_rule(s, out, id, orig);
    }
    if matches!(node(s, id)?.rule, RuleRef::Subtree(_)) {
        emit(s, out, EditCommand::ClearRule { node: id })?;
    }
    for child in &orig.children {
        emit(s, out, EditCommand::AddPremise { node: id, position: None })?;
        let fresh = node(s, id)?.children.last().expect("just added").id;
        rebuild(s, out, fresh, child)?;
    }
    match &orig.rule {
        RuleRef::Hole if node(s, id)?.rule == RuleRef::Hole => Ok(()),
        _ => restore_rule(s, out, id, orig),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::new_document;
    use crate::term::Sort;
    use crate::textio::{parse_judgment, parse_term};

    fn eval_doc() -> DerivationDoc {
        new_document("alfa-eval").unwrap()
    }

    #[test]
    fn set_rule_creates_premise_holes() {
        let d = eval_doc();
        let d2 = apply_edit(&d, &EditCommand::SetRule { node: NodeId(0), rule: "E-Plus".into() }).unwrap();
        assert_eq!(d2.root.children.len(), 2);
        assert!(d2.root.children.iter().all(|c| c.judgment.is_hole()));
        assert_eq!(d.root.children.len(), 0, "input unchanged");
    }

    #[test]
    fn fill_hole_opens_a_judgment_hole() {
        let d = eval_doc();
        let cmd = EditCommand::FillHole {
            node: NodeId(0),
            path: Path(vec![0]),
            term: parse_term(Sort::Expr, "1 + 2").unwrap(),
        };
        let d2 = apply_edit(&d, &cmd).unwrap();
        assert_eq!(d2.root.judgment, parse_judgment("1 + 2 evalto ?", None).unwrap());
        let again = apply_edit(&d2, &cmd).unwrap_err();
        assert!(matches!(again, DocError::IllegalEdit(_)));
    }

    #[test]
    fn sort_mismatch_is_rejected() {
        let d = eval_doc();
        let cmd = EditCommand::EditJudgment {
            node: NodeId(0),
            path: Path(vec![0]),
            term: Term::TBool,
        };
        assert!(matches!(apply_edit(&d, &cmd), Err(DocError::SortMismatch { .. })));
    }

    #[test]
    fn unknown_subtree_leaves_document_unchanged() {
        let d = eval_doc();
        let cmd = EditCommand::InsertSubtreeRef { node: NodeId(0), subtree: "S9".into() };
        assert_eq!(apply_edit(&d, &cmd), Err(DocError::UnknownSubtree("S9".into())));
    }

    #[test]
    fn subtree_references_point_backwards() {
        let mut d = eval_doc();
        for name in ["S1", "S2"] {
            d = apply_edit(&d, &EditCommand::DefineSubtree { name: name.into() }).unwrap();
        }
        let s1_root = d.subtrees[0].root.id;
        let fwd = EditCommand::InsertSubtreeRef { node: s1_root, subtree: "S2".into() };
        assert!(matches!(apply_edit(&d, &fwd), Err(DocError::ForwardSubtreeRef { .. })));
        let own = EditCommand::InsertSubtreeRef { node: s1_root, subtree: "S1".into() };
        assert!(matches!(apply_edit(&d, &own), Err(DocError::ForwardSubtreeRef { .. })));
        let dup = EditCommand::DefineSubtree { name: "S1".into() };
        assert_eq!(apply_edit(&d, &dup), Err(DocError::DuplicateName("S1".into())));
    }

    #[test]
    fn abbreviations_only_reference_earlier_ones() {
        let d = new_document("alfa-typing").unwrap();
        let fwd = EditCommand::DefineAbbrev {
            name: "A".into(),
            term: parse_term(Sort::Ctx, "$B").unwrap(),
        };
        assert_eq!(apply_edit(&d, &fwd), Err(DocError::UnboundAbbrev("B".into())));
    }

    #[test]
    fn inverse_of_remove_premise_rebuilds_the_subtree() {
        let mut d = eval_doc();
        let steps = [
            EditCommand::SetJudgment {
                node: NodeId(0),
                judgment: parse_judgment("1 + 2 evalto 3", None).unwrap(),
            },
            EditCommand::SetRule { node: NodeId(0), rule: "E-Plus".into() },
            EditCommand::SetJudgment {
                node: NodeId(1),
                judgment: parse_judgment("1 evalto 1", None).unwrap(),
            },
            EditCommand::SetRule { node: NodeId(1), rule: "E-Num".into() },
        ];
        for c in &steps {
            d = apply_edit(&d, c).unwrap();
        }
        let cmd = EditCommand::RemovePremise { node: NodeId(0), position: 0 };
        let after = apply_edit(&d, &cmd).unwrap();
        let mut back = after;
        for c in inverse(&d, &cmd).unwrap() {
            back = apply_edit(&back, &c).unwrap();
        }
        assert!(back.eq_up_to_ids(&d));
    }
}
