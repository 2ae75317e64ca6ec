//! Node-local three-valued verification and its incremental variant.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::document::{apply_edit, DerivNode, DerivationDoc, DocError, EditCommand, NodeId, Owner, RuleRef};
use crate::rules::{eval_side_condition, Bindings, Locus, Matcher, MismatchKind, SideOutcome};
use crate::term::{eq3_judgment, Judgment, Path, Term, TriBool};
use crate::textio::print_term;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyError {
    pub node: NodeId,
    pub locus: Locus,
    /// Path within the judgment named by `locus`: the node's own judgment for
    /// `Conclusion`, `SideCondition` and `RuleApplication`, premise `i`'s
    /// judgment for `Premise(i)`.
    pub path: Path,
    pub expected: String,
    pub found: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Obligation {
    pub node: NodeId,
    pub locus: Locus,
    /// Holes (within the judgment named by `locus`) that must be filled.
    pub holes: Vec<Path>,
    pub statement: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeStatus {
    Correct(Bindings),
    Incorrect(Vec<VerifyError>),
    Indeterminate(Vec<Obligation>),
}

impl NodeStatus {
    pub fn label(&self) -> &'static str {
        match self {
            NodeStatus::Correct(_) => "correct",
            NodeStatus::Incorrect(_) => "incorrect",
            NodeStatus::Indeterminate(_) => "indeterminate",
        }
    }

    pub fn is_correct(&self) -> bool {
        matches!(self, NodeStatus::Correct(_))
    }

    pub fn is_incorrect(&self) -> bool {
        matches!(self, NodeStatus::Incorrect(_))
    }

    pub fn errors(&self) -> &[VerifyError] {
        match self {
            NodeStatus::Incorrect(e) => e,
            _ => &[],
        }
    }

    pub fn obligations(&self) -> &[Obligation] {
        match self {
            NodeStatus::Indeterminate(o) => o,
            _ => &[],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum TreeStatus {
    CompleteCorrect,
    Incomplete,
    HasErrors,
}

impl TreeStatus {
    fn of<'a>(statuses: impl IntoIterator<Item = &'a NodeStatus>) -> TreeStatus {
        let mut out = TreeStatus::CompleteCorrect;
        for s in statuses {
            match s {
                NodeStatus::Incorrect(_) => return TreeStatus::HasErrors,
                NodeStatus::Indeterminate(_) => out = TreeStatus::Incomplete,
                NodeStatus::Correct(_) => {}
            }
        }
        out
    }
}

/// Outcome of checking one node, with the bindings found so far (also for
/// nodes that are not correct, so documentation can show partial matches).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeResult {
    pub status: NodeStatus,
    pub bindings: Bindings,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub nodes: BTreeMap<NodeId, NodeResult>,
    /// Tree status of each subtree, by name.
    pub subtrees: BTreeMap<String, TreeStatus>,
    pub tree_status: TreeStatus,
}

impl VerificationReport {
    pub fn status(&self, id: NodeId) -> Option<&NodeStatus> {
        self.nodes.get(&id).map(|r| &r.status)
    }

    pub fn errors(&self) -> impl Iterator<Item = &VerifyError> {
        self.nodes.values().flat_map(|r| r.status.errors())
    }
}

/// Shortens `path` so it stops at an abbreviation in the displayed judgment.
fn truncate_at_abbrev(shown: &Judgment, path: &Path) -> Path {
    let Some((&first, rest)) = path.0.split_first() else {
        return path.clone();
    };
    let Some(mut t) = shown.slots().get(first).copied() else {
        return path.clone();
    };
    let mut out = vec![first];
    for &i in rest {
        if matches!(t, Term::Abbrev(_)) {
            break;
        }
        match t.child(i) {
            Some(c) => {
                t = c;
                out.push(i);
            }
            None => break,
        }
    }
    Path(out)
}

fn judgment_of(doc: &DerivationDoc, j: &Judgment) -> Judgment {
    // documents are validated on every edit, so expansion cannot fail here
    doc.expand_judgment(j).unwrap_or_else(|_| j.clone())
}

fn error(node: NodeId, locus: Locus, path: Path, expected: String, found: String, message: String) -> VerifyError {
    VerifyError {
        node,
        locus,
        path,
        expected,
        found,
        message,
    }
}

fn place(locus: Locus) -> String {
    match locus {
        Locus::Conclusion => "the conclusion".into(),
        Locus::Premise(i) => format!("premise {}", i + 1),
        Locus::RuleApplication => "the rule".into(),
        Locus::SideCondition(i) => format!("side condition {}", i + 1),
    }
}

/// Classifies one node. The result depends only on the node's judgment and
/// rule, its premises' judgments, and for a subtree reference the subtree's
/// root judgment and tree status.
pub fn verify_node(
    doc: &DerivationDoc,
    node: &DerivNode,
    subtree_status: &dyn Fn(&str) -> Option<TreeStatus>,
) -> NodeResult {
    let id = node.id;
    let rule_name = match &node.rule {
        RuleRef::Hole => {
            return NodeResult {
                status: NodeStatus::Indeterminate(vec![Obligation {
                    node: id,
                    locus: Locus::RuleApplication,
                    holes: Vec::new(),
                    statement: "select a rule".into(),
                }]),
                bindings: Bindings::new(),
            }
        }
        RuleRef::Subtree(name) => return verify_reference(doc, node, name, subtree_status),
        RuleRef::Rule(r) => r,
    };
    let incorrect = |e: VerifyError| NodeResult {
        status: NodeStatus::Incorrect(vec![e]),
        bindings: Bindings::new(),
    };
    let Some(rule) = doc.system.rule(rule_name) else {
        return incorrect(error(
            id,
            Locus::RuleApplication,
            Path::root(),
            format!("a rule of {}", doc.system.id),
            rule_name.clone(),
            format!("Unknown rule `{rule_name}` in system {}.", doc.system.id),
        ));
    };

    let conclusion = judgment_of(doc, &node.judgment);
    let mut m = Matcher::new(Bindings::new(), doc.system.kind);
    m.judgment(&rule.conclusion, &conclusion);
    let mut errors = Vec::new();
    if node.children.len() != rule.arity() {
        let (k, n) = (rule.arity(), node.children.len());
        errors.push(error(
            id,
            Locus::RuleApplication,
            Path::root(),
            format!("{k} premises"),
            format!("{n}"),
            format!("Rule {} expects {k} premises, found {n}.", rule.name),
        ));
    } else {
        for (i, (schema, child)) in rule.premises.iter().zip(&node.children).enumerate() {
            m.set_locus(Locus::Premise(i));
            m.judgment(schema, &judgment_of(doc, &child.judgment));
        }
    }

    let mut undecided = Vec::new();
    let style = doc.system.kind.ctx_style();
    for (i, c) in rule.side_conditions.iter().enumerate() {
        match eval_side_condition(c, i, &mut m.bindings, style) {
            SideOutcome::Holds => {}
            SideOutcome::Unknown(holes) => undecided.push((i, holes)),
            SideOutcome::Fails {
                path,
                expected,
                found,
                message,
            } => errors.push(error(id, Locus::SideCondition(i), path, expected, found, message)),
        }
    }

    let shown = |locus: Locus| -> Option<&Judgment> {
        match locus {
            Locus::Premise(i) => node.children.get(i).map(|c| &c.judgment),
            _ => Some(&node.judgment),
        }
    };
    for mm in &m.mismatches {
        let path = shown(mm.locus).map_or(mm.path.clone(), |j| truncate_at_abbrev(j, &mm.path));
        let message = if mm.locus == Locus::Conclusion || mm.kind == MismatchKind::Shape {
            mm.message()
        } else {
            format!("{} (in {})", mm.message(), place(mm.locus))
        };
        errors.push(error(id, mm.locus, path, mm.expected.clone(), mm.found.clone(), message));
    }
    let pending_without_holes = m.blocked.is_empty() && undecided.is_empty();
    if errors.is_empty() && pending_without_holes {
        for (locus, path) in &m.pending {
            let found = shown(*locus)
                .and_then(|j| crate::term::subterm_at(j, path).ok())
                .map_or_else(String::new, print_term);
            errors.push(error(
                id,
                *locus,
                path.clone(),
                "a substitution with a closed value".into(),
                found,
                "Cannot compute the substitution: the value is not closed.".into(),
            ));
        }
    }
    errors.sort_by(|a, b| a.locus.cmp(&b.locus).then_with(|| a.path.cmp(&b.path)));
    if !errors.is_empty() {
        return NodeResult {
            status: NodeStatus::Incorrect(errors),
            bindings: m.bindings,
        };
    }

    let mut by_locus: BTreeMap<Locus, Vec<Path>> = BTreeMap::new();
    for (locus, p) in m.blocked.iter().chain(m.pending.iter()) {
        let paths = by_locus.entry(*locus).or_default();
        if !paths.contains(p) {
            paths.push(p.clone());
        }
    }
    let mut obligations: Vec<Obligation> = by_locus
        .into_iter()
        .map(|(locus, holes)| Obligation {
            node: id,
            locus,
            statement: match locus {
                Locus::Premise(i) => format!("fill the holes in premise {}", i + 1),
                _ => "fill the holes in the judgment".into(),
            },
            holes,
        })
        .collect();
    for (i, holes) in undecided {
        obligations.push(Obligation {
            node: id,
            locus: Locus::SideCondition(i),
            holes,
            statement: format!("side condition {} cannot be decided yet", i + 1),
        });
    }
    if obligations.is_empty() {
        NodeResult {
            status: NodeStatus::Correct(m.bindings.clone()),
            bindings: m.bindings,
        }
    } else {
        NodeResult {
            status: NodeStatus::Indeterminate(obligations),
            bindings: m.bindings,
        }
    }
}

fn verify_reference(
    doc: &DerivationDoc,
    node: &DerivNode,
    name: &str,
    subtree_status: &dyn Fn(&str) -> Option<TreeStatus>,
) -> NodeResult {
    let id = node.id;
    let result = |status| NodeResult {
        status,
        bindings: Bindings::new(),
    };
    let (Ok(def), Some(sub)) = (doc.resolve_subtree(name), subtree_status(name)) else {
        return result(NodeStatus::Incorrect(vec![error(
            id,
            Locus::RuleApplication,
            Path::root(),
            "a defined subtree".into(),
            name.to_string(),
            format!("Subtree {name} is not defined."),
        )]));
    };
    let mine = judgment_of(doc, &node.judgment);
    let theirs = judgment_of(doc, &def.root.judgment);
    let mut errors = Vec::new();
    let mut holes = Vec::new();
    match eq3_judgment(&theirs, &mine) {
        TriBool::Yes => {}
        TriBool::No(w) => {
            let show = |j: &Judgment| {
                if w.is_root() {
                    j.kind().map_or("?".to_string(), |k| k.describe().to_string())
                } else {
                    crate::term::subterm_at(j, &w).map_or_else(|_| String::new(), print_term)
                }
            };
            let (e, f) = (show(&theirs), show(&mine));
            errors.push(error(
                id,
                Locus::Conclusion,
                truncate_at_abbrev(&node.judgment, &w),
                e.clone(),
                f.clone(),
                format!("Subtree {name} proves `{e}` here, but the node states `{f}`."),
            ));
        }
        TriBool::Unknown(hs) => holes = hs,
    }
    if sub == TreeStatus::HasErrors {
        errors.push(error(
            id,
            Locus::RuleApplication,
            Path::root(),
            "a correct subtree".into(),
            "a subtree with errors".into(),
            format!("Subtree {name} contains errors."),
        ));
    }
    if !errors.is_empty() {
        return result(NodeStatus::Incorrect(errors));
    }
    let mut obligations = Vec::new();
    if !holes.is_empty() {
        obligations.push(Obligation {
            node: id,
            locus: Locus::Conclusion,
            holes,
            statement: format!("fill the holes so the judgment agrees with subtree {name}"),
        });
    }
    if sub == TreeStatus::Incomplete {
        obligations.push(Obligation {
            node: id,
            locus: Locus::RuleApplication,
            holes: Vec::new(),
            statement: format!("complete subtree {name}"),
        });
    }
    if obligations.is_empty() {
        result(NodeStatus::Correct(Bindings::new()))
    } else {
        result(NodeStatus::Indeterminate(obligations))
    }
}

/// Verifies every node: subtrees in definition order, then the root tree.
pub fn verify_document(doc: &DerivationDoc) -> VerificationReport {
    let all = doc.node_ids();
    reverify(doc, None, &all)
}

/// Re-verifies the nodes in `dirty`, reusing `previous` for the rest.
/// Statuses of nodes no longer in the document are dropped.
fn reverify(
    doc: &DerivationDoc,
    previous: Option<&VerificationReport>,
    dirty: &BTreeSet<NodeId>,
) -> VerificationReport {
    let mut nodes = BTreeMap::new();
    let mut subtrees: BTreeMap<String, TreeStatus> = BTreeMap::new();
    for (owner, tree) in doc.trees() {
        let mut statuses = Vec::new();
        tree.walk(&mut |n| {
            let reuse = previous
                .filter(|_| !dirty.contains(&n.id))
                .and_then(|p| p.nodes.get(&n.id));
            let r = match reuse {
                Some(r) => r.clone(),
                None => verify_node(doc, n, &|name| subtrees.get(name).copied()),
            };
            statuses.push(r.status.clone());
            nodes.insert(n.id, r);
        });
        if let Owner::Subtree(i) = owner {
            subtrees.insert(doc.subtrees[i].name.clone(), TreeStatus::of(&statuses));
        }
    }
    let tree_status = TreeStatus::of(nodes.values().map(|r| &r.status));
    VerificationReport {
        nodes,
        subtrees,
        tree_status,
    }
}

/// Nodes whose status may change when `cmd` is applied to `before` giving
/// `after`: the edited node and its parent, nodes the edit creates, and for
/// edits inside a subtree every node referencing it (transitively) together
/// with their parents.
pub fn affected_between(before: &DerivationDoc, after: &DerivationDoc, cmd: &EditCommand) -> BTreeSet<NodeId> {
    let old = before.node_ids();
    let mut out: BTreeSet<NodeId> = after.node_ids().difference(&old).copied().collect();
    if let Some(t) = cmd.target() {
        out.insert(t);
        out.extend(after.parent_of(t));
    }
    let mut touched: Vec<usize> = out
        .iter()
        .filter_map(|id| match after.owner_of(*id) {
            Some(Owner::Subtree(i)) => Some(i),
            _ => None,
        })
        .collect();
    let mut seen = BTreeSet::new();
    while let Some(i) = touched.pop() {
        if !seen.insert(i) {
            continue;
        }
        for r in after.references_to(&after.subtrees[i].name) {
            out.insert(r);
            out.extend(after.parent_of(r));
            if let Some(Owner::Subtree(j)) = after.owner_of(r) {
                touched.push(j);
            }
        }
    }
    out.retain(|id| after.node(*id).is_some());
    out
}

/// [`affected_between`] for the document `cmd` would produce.
pub fn affected_nodes(doc: &DerivationDoc, cmd: &EditCommand) -> Result<BTreeSet<NodeId>, DocError> {
    let after = apply_edit(doc, cmd)?;
    Ok(affected_between(doc, &after, cmd))
}

/// Result of an incremental re-verification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Update {
    pub doc: DerivationDoc,
    pub report: VerificationReport,
    /// Nodes that were re-verified.
    pub affected: BTreeSet<NodeId>,
    /// Nodes that no longer exist.
    pub removed: BTreeSet<NodeId>,
}

/// Applies `cmd` and re-verifies only the affected nodes.
pub fn apply_and_verify(
    doc: &DerivationDoc,
    report: &VerificationReport,
    cmd: &EditCommand,
) -> Result<Update, DocError> {
    let after = apply_edit(doc, cmd)?;
    let affected = affected_between(doc, &after, cmd);
    let report = reverify(&after, Some(report), &affected);
    let removed = doc.node_ids().difference(&after.node_ids()).copied().collect();
    Ok(Update {
        doc: after,
        report,
        affected,
        removed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::new_document;
    use crate::textio::parse_document;

    fn check(text: &str) -> (DerivationDoc, VerificationReport) {
        let doc = parse_document(text).unwrap();
        let r = verify_document(&doc);
        (doc, r)
    }

    #[test]
    fn fresh_document_is_incomplete() {
        let r = verify_document(&new_document("prop-nd").unwrap());
        assert_eq!(r.tree_status, TreeStatus::Incomplete);
        assert_eq!(r.nodes.len(), 1);
    }

    #[test]
    fn e_plus_golden_is_correct() {
        let (_, r) = check(
            "system alfa-eval\nderive:\n  1 + 2 evalto 3  by E-Plus\n    1 evalto 1  by E-Num\n    2 evalto 2  by E-Num\n",
        );
        assert_eq!(r.tree_status, TreeStatus::CompleteCorrect);
    }

    #[test]
    fn arithmetic_error_is_a_side_condition_failure() {
        let (doc, r) = check(
            "system alfa-eval\nderive:\n  1 + 2 evalto 4  by E-Plus\n    1 evalto 1  by E-Num\n    2 evalto 2  by E-Num\n",
        );
        assert_eq!(r.tree_status, TreeStatus::HasErrors);
        let errs = r.status(doc.root.id).unwrap().errors();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].locus, Locus::SideCondition(0));
        assert_eq!(errs[0].path, Path(vec![1]));
    }

    #[test]
    fn unknown_rule_is_incorrect() {
        let doc = new_document("alfa-eval").unwrap();
        let mut doc = doc;
        doc.root.rule = RuleRef::Rule("E-Bogus".into());
        let r = verify_document(&doc);
        assert_eq!(r.tree_status, TreeStatus::HasErrors);
        assert_eq!(r.status(doc.root.id).unwrap().errors()[0].locus, Locus::RuleApplication);
    }

    #[test]
    fn function_expected_but_let_found() {
        let (doc, r) = check(
            "system alfa-eval\nderive:\n  (let x = 1 in x) 2 evalto ?  by E-App\n    let x = 1 in x evalto let x = 1 in x  by E-Let\n    2 evalto 2  by E-Num\n    ? evalto ?  by ?\n",
        );
        let errs = r.status(doc.root.id).unwrap().errors();
        assert!(
            errs.iter()
                .any(|e| e.message.contains("Expected a function term, but found a let-expression.")),
            "{errs:?}"
        );
    }

    #[test]
    fn wrong_variable_type_is_reported_on_the_type() {
        let (doc, r) = check("system alfa-typing\nderive:\n  [x:Num] |- x : Bool  by T-Var\n");
        let errs = r.status(doc.root.id).unwrap().errors();
        assert_eq!(errs[0].path, Path(vec![2]));
        assert_eq!(
            errs[0].message,
            "Expected `Num` (the type of x in the context), but found `Bool`."
        );
    }

    #[test]
    fn reference_to_correct_subtree() {
        let (_, r) = check(
            "system alfa-eval\nsubtree S1:\n  1 evalto 1  by E-Num\nderive:\n  1 + 1 evalto 2  by E-Plus\n    1 evalto 1  by use S1\n    1 evalto 1  by use S1\n",
        );
        assert_eq!(r.tree_status, TreeStatus::CompleteCorrect);
    }

    #[test]
    fn reference_to_broken_subtree_is_incorrect() {
        let (doc, r) = check(
            "system alfa-eval\nsubtree S1:\n  1 evalto 2  by E-Num\nderive:\n  1 evalto 2  by use S1\n",
        );
        assert!(r.status(doc.root.id).unwrap().is_incorrect());
    }
}
