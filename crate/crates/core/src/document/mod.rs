//! Derivation documents: prelude abbreviations, named subtrees and the root
//! tree, plus the edit commands that transform them.

mod edit;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::rules::{builtin_system, RuleSystem};
use crate::term::{check_judgment_sorts, Judgment, JudgmentKind, Path, Sort, SortError, Term};

pub use edit::{apply_edit, inverse, EditCommand};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl Serialize for NodeId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl std::str::FromStr for NodeId {
    type Err = ();

    fn from_str(s: &str) -> Result<NodeId, ()> {
        s.strip_prefix('n')
            .and_then(|n| n.parse().ok())
            .map(NodeId)
            .ok_or(())
    }
}

/// What justifies a node.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RuleRef {
    Hole,
    Rule(String),
    Subtree(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivNode {
    pub id: NodeId,
    pub judgment: Judgment,
    pub rule: RuleRef,
    pub children: Vec<DerivNode>,
}

impl DerivNode {
    pub fn hole(id: NodeId) -> DerivNode {
        DerivNode {
            id,
            judgment: Judgment::Hole,
            rule: RuleRef::Hole,
            children: Vec::new(),
        }
    }

    /// Preorder traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a DerivNode)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(DerivNode::size).sum::<usize>()
    }

    fn find(&self, id: NodeId) -> Option<&DerivNode> {
        if self.id == id {
            return Some(self);
        }
        self.children.iter().find_map(|c| c.find(id))
    }

    fn find_mut(&mut self, id: NodeId) -> Option<&mut DerivNode> {
        if self.id == id {
            return Some(self);
        }
        self.children.iter_mut().find_map(|c| c.find_mut(id))
    }

    fn parent_of(&self, id: NodeId) -> Option<NodeId> {
        for c in &self.children {
            if c.id == id {
                return Some(self.id);
            }
            if let Some(p) = c.parent_of(id) {
                return Some(p);
            }
        }
        None
    }

    /// Child indices from this node down to `id`.
    fn index_path(&self, id: NodeId, out: &mut Vec<usize>) -> bool {
        if self.id == id {
            return true;
        }
        for (i, c) in self.children.iter().enumerate() {
            out.push(i);
            if c.index_path(id, out) {
                return true;
            }
            out.pop();
        }
        false
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feedback {
    Full,
    Silent,
}

/// A prelude abbreviation. The expansion is computed once, when defined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Definition {
    pub name: String,
    pub term: Term,
    pub expanded: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubtreeDef {
    pub name: String,
    pub root: DerivNode,
}

/// Which tree of the document a node belongs to.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Owner {
    Subtree(usize),
    Root,
}

#[derive(Clone, Debug)]
pub struct DerivationDoc {
    pub system: Arc<RuleSystem>,
    pub feedback: Feedback,
    pub prelude: Vec<Definition>,
    pub subtrees: Vec<SubtreeDef>,
    pub root: DerivNode,
    pub(crate) next_id: u32,
}

impl PartialEq for DerivationDoc {
    fn eq(&self, other: &Self) -> bool {
        self.system.id == other.system.id
            && self.feedback == other.feedback
            && self.prelude == other.prelude
            && self.subtrees == other.subtrees
            && self.root == other.root
    }
}

impl Eq for DerivationDoc {}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DocError {
    #[error("no node {0}")]
    UnknownNode(NodeId),
    #[error("bad path {path}: {reason}")]
    BadPath { path: Path, reason: String },
    #[error("rule `{0}` is not part of this system")]
    UnknownRule(String),
    #[error("no subtree named `{0}`")]
    UnknownSubtree(String),
    #[error("subtree `{to}` must be defined before it is used in `{from}`")]
    ForwardSubtreeRef { from: String, to: String },
    #[error("the name `{0}` is already defined")]
    DuplicateName(String),
    #[error("sort mismatch at {path}: expected {expected}, found {found}")]
    SortMismatch {
        path: Path,
        expected: String,
        found: String,
    },
    #[error("abbreviation `${0}` is not defined")]
    UnboundAbbrev(String),
    #[error("unknown rule system `{0}`")]
    UnknownSystem(String),
    #[error("{0}")]
    IllegalEdit(String),
}

impl From<SortError> for DocError {
    fn from(e: SortError) -> DocError {
        DocError::SortMismatch {
            path: e.path,
            expected: e.expected.describe().to_string(),
            found: e.found,
        }
    }
}

impl DocError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            DocError::UnknownNode(_) => "UnknownNode",
            DocError::BadPath { .. } => "BadPath",
            DocError::UnknownRule(_) => "UnknownRule",
            DocError::UnknownSubtree(_) => "UnknownSubtree",
            DocError::ForwardSubtreeRef { .. } => "ForwardSubtreeRef",
            DocError::DuplicateName(_) => "DuplicateName",
            DocError::SortMismatch { .. } => "SortMismatch",
            DocError::UnboundAbbrev(_) => "UnboundAbbrev",
            DocError::UnknownSystem(_) => "UnknownSystem",
            DocError::IllegalEdit(_) => "IllegalEdit",
        }
    }
}

/// A fresh document: empty prelude, no subtrees, a single hole as root.
pub fn new_document(system_id: &str) -> Result<DerivationDoc, DocError> {
    let system =
        builtin_system(system_id).ok_or_else(|| DocError::UnknownSystem(system_id.to_string()))?;
    Ok(DerivationDoc::with_system(system))
}

impl DerivationDoc {
    pub fn with_system(system: Arc<RuleSystem>) -> DerivationDoc {
        DerivationDoc {
            system,
            feedback: Feedback::Full,
            prelude: Vec::new(),
            subtrees: Vec::new(),
            root: DerivNode::hole(NodeId(0)),
            next_id: 1,
        }
    }

    /// Assembles a document from trees built elsewhere. Node ids are
    /// reassigned in document order and every invariant is checked.
    pub fn from_parts(
        system: Arc<RuleSystem>,
        feedback: Feedback,
        prelude: Vec<(String, Term)>,
        subtrees: Vec<(String, DerivNode)>,
        root: DerivNode,
    ) -> Result<DerivationDoc, DocError> {
        let mut doc = DerivationDoc::with_system(system);
        doc.feedback = feedback;
        for (name, term) in prelude {
            doc = apply_edit(&doc, &EditCommand::DefineAbbrev { name, term })?;
        }
        doc.subtrees = subtrees
            .into_iter()
            .map(|(name, root)| SubtreeDef { name, root })
            .collect();
        doc.root = root;
        let doc = doc.renumbered();
        doc.validate()?;
        Ok(doc)
    }

    pub(crate) fn fresh_id(&mut self) -> NodeId {
        let id = NodeId(self.next_id);
        self.next_id += 1;
        id
    }

    /// Id the next created node will receive.
    pub fn peek_next_id(&self) -> NodeId {
        NodeId(self.next_id)
    }

    pub fn trees(&self) -> impl Iterator<Item = (Owner, &DerivNode)> {
        self.subtrees
            .iter()
            .enumerate()
            .map(|(i, s)| (Owner::Subtree(i), &s.root))
            .chain(std::iter::once((Owner::Root, &self.root)))
    }

    pub fn tree(&self, owner: &Owner) -> &DerivNode {
        match owner {
            Owner::Subtree(i) => &self.subtrees[*i].root,
            Owner::Root => &self.root,
        }
    }

    /// All nodes in document order: subtrees in definition order, then the
    /// root tree, each in preorder.
    pub fn nodes(&self) -> Vec<&DerivNode> {
        let mut out = Vec::new();
        for (_, t) in self.trees() {
            t.walk(&mut |n| out.push(n));
        }
        out
    }

    pub fn node_count(&self) -> usize {
        self.trees().map(|(_, t)| t.size()).sum()
    }

    pub fn node_ids(&self) -> BTreeSet<NodeId> {
        self.nodes().into_iter().map(|n| n.id).collect()
    }

    pub fn node(&self, id: NodeId) -> Option<&DerivNode> {
        self.trees().find_map(|(_, t)| t.find(id))
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> Option<&mut DerivNode> {
        if let Some(n) = self.root.find_mut(id) {
            return Some(n);
        }
        self.subtrees.iter_mut().find_map(|s| s.root.find_mut(id))
    }

    pub fn owner_of(&self, id: NodeId) -> Option<Owner> {
        self.trees().find(|(_, t)| t.find(id).is_some()).map(|(o, _)| o)
    }

    pub fn parent_of(&self, id: NodeId) -> Option<NodeId> {
        self.trees().find_map(|(_, t)| t.parent_of(id))
    }

    /// Human-readable location such as `derive.0.1` or `S1.0`.
    pub fn node_label(&self, id: NodeId) -> Option<String> {
        let owner = self.owner_of(id)?;
        let mut idx = Vec::new();
        self.tree(&owner).index_path(id, &mut idx);
        let mut label = match owner {
            Owner::Subtree(i) => self.subtrees[i].name.clone(),
            Owner::Root => "derive".to_string(),
        };
        for i in idx {
            label.push_str(&format!(".{i}"));
        }
        Some(label)
    }

    pub fn definition(&self, name: &str) -> Option<&Definition> {
        self.prelude.iter().find(|d| d.name == name)
    }

    pub fn subtree_index(&self, name: &str) -> Option<usize> {
        self.subtrees.iter().position(|s| s.name == name)
    }

    pub fn resolve_subtree(&self, name: &str) -> Result<&SubtreeDef, DocError> {
        self.subtrees
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| DocError::UnknownSubtree(name.to_string()))
    }

    /// Replaces every abbreviation by its (already expanded) definition.
    pub fn expand_abbrevs(&self, t: &Term) -> Result<Term, DocError> {
        expand_with(&self.prelude, t)
    }

    pub fn expand_judgment(&self, j: &Judgment) -> Result<Judgment, DocError> {
        let mut err = None;
        let out = j.map_slots(|t| {
            self.expand_abbrevs(t).unwrap_or_else(|e| {
                err.get_or_insert(e);
                t.clone()
            })
        });
        err.map_or(Ok(out), Err)
    }

    /// Ids of nodes whose rule is a reference to subtree `name`.
    pub fn references_to(&self, name: &str) -> Vec<NodeId> {
        self.nodes()
            .into_iter()
            .filter(|n| matches!(&n.rule, RuleRef::Subtree(s) if s == name))
            .map(|n| n.id)
            .collect()
    }

    /// Whether any node judgment or later definition mentions `$name`.
    pub fn abbrev_in_use(&self, name: &str) -> bool {
        let mentions = |t: &Term| mentions_abbrev(t, name);
        self.prelude.iter().any(|d| d.name != name && mentions(&d.term))
            || self
                .nodes()
                .iter()
                .any(|n| n.judgment.slots().into_iter().any(mentions))
    }

    /// Checks every document invariant.
    pub fn validate(&self) -> Result<(), DocError> {
        let mut names = BTreeSet::new();
        for (i, d) in self.prelude.iter().enumerate() {
            if !names.insert(d.name.as_str()) {
                return Err(DocError::DuplicateName(d.name.clone()));
            }
            if d.term.has_metas() || contains_subst(&d.term) {
                return Err(DocError::IllegalEdit(format!(
                    "definition `{}` contains schema-only syntax",
                    d.name
                )));
            }
            let expanded = expand_with(&self.prelude[..i], &d.term)?;
            if expanded != d.expanded {
                return Err(DocError::IllegalEdit(format!(
                    "stale expansion for `{}`",
                    d.name
                )));
            }
        }
        let mut ids = BTreeSet::new();
        let mut subtree_names = BTreeSet::new();
        for (owner, tree) in self.trees() {
            if let Owner::Subtree(i) = owner {
                let name = &self.subtrees[i].name;
                if !subtree_names.insert(name.as_str()) {
                    return Err(DocError::DuplicateName(name.clone()));
                }
            }
            let mut result = Ok(());
            tree.walk(&mut |n| {
                if result.is_err() {
                    return;
                }
                if !ids.insert(n.id) || n.id.0 >= self.next_id {
                    result = Err(DocError::IllegalEdit(format!("node id {} is not unique", n.id)));
                    return;
                }
                result = self.check_node(&owner, n);
            });
            result?;
        }
        Ok(())
    }

    pub(crate) fn check_node(&self, owner: &Owner, n: &DerivNode) -> Result<(), DocError> {
        self.check_judgment(&n.judgment)?;
        match &n.rule {
            RuleRef::Hole => {}
            // unknown rule names are a verification error, not a structural one
            RuleRef::Rule(_) => {}
            RuleRef::Subtree(s) => {
                let to = self
                    .subtree_index(s)
                    .ok_or_else(|| DocError::UnknownSubtree(s.clone()))?;
                if let Owner::Subtree(from) = owner {
                    if to >= *from {
                        return Err(DocError::ForwardSubtreeRef {
                            from: self.subtrees[*from].name.clone(),
                            to: s.clone(),
                        });
                    }
                }
                if !n.children.is_empty() {
                    return Err(DocError::IllegalEdit(
                        "a subtree reference cannot have premises".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// A judgment is admissible if it has the system's kind, resolves all
    /// abbreviations, and sort-checks after expansion.
    pub fn check_judgment(&self, j: &Judgment) -> Result<(), DocError> {
        let Some(kind) = j.kind() else {
            return Ok(());
        };
        if kind != self.system.kind {
            return Err(DocError::SortMismatch {
                path: Path::root(),
                expected: self.system.kind.describe().to_string(),
                found: kind.describe().to_string(),
            });
        }
        for slot in j.slots() {
            if slot.has_metas() || contains_subst(slot) {
                return Err(DocError::IllegalEdit(
                    "metavariables and substitutions only occur in rule schemas".into(),
                ));
            }
        }
        check_judgment_sorts(j)?;
        let expanded = self.expand_judgment(j)?;
        Ok(check_judgment_sorts(&expanded)?)
    }

    /// Copy with node ids renumbered in document order, for comparisons that
    /// ignore id assignment.
    pub fn renumbered(&self) -> DerivationDoc {
        let mut out = self.clone();
        let mut next = 0;
        let mut renumber = |n: &mut DerivNode| renumber(n, &mut next);
        for s in &mut out.subtrees {
            renumber(&mut s.root);
        }
        renumber(&mut out.root);
        out.next_id = next;
        out
    }

    pub fn eq_up_to_ids(&self, other: &DerivationDoc) -> bool {
        self.renumbered() == other.renumbered()
    }
}

fn renumber(n: &mut DerivNode, next: &mut u32) {
    n.id = NodeId(*next);
    *next += 1;
    for c in &mut n.children {
        renumber(c, next);
    }
}

fn contains_subst(t: &Term) -> bool {
    matches!(t, Term::Subst(..)) || t.children().into_iter().any(contains_subst)
}

fn mentions_abbrev(t: &Term, name: &str) -> bool {
    matches!(t, Term::Abbrev(n) if n == name)
        || t.children().into_iter().any(|c| mentions_abbrev(c, name))
}

pub(crate) fn expand_with(prelude: &[Definition], t: &Term) -> Result<Term, DocError> {
    match t {
        Term::Abbrev(n) => prelude
            .iter()
            .find(|d| &d.name == n)
            .map(|d| d.expanded.clone())
            .ok_or_else(|| DocError::UnboundAbbrev(n.clone())),
        _ if !t.has_abbrevs() => Ok(t.clone()),
        _ => {
            let mut out = t.clone();
            for i in 0..t.children().len() {
                let c = expand_with(prelude, t.child(i).expect("index in range"))?;
                *out.child_mut(i).expect("index in range") = c;
            }
            Ok(out)
        }
    }
}

/// Sorts an abbreviation body may have in a system of `kind`, in the order
/// a text parser should try them.
pub fn definition_sorts(kind: JudgmentKind) -> &'static [Sort] {
    match kind {
        JudgmentKind::Entail => &[Sort::Ctx, Sort::Prop],
        _ => &[Sort::Ctx, Sort::Type, Sort::Expr],
    }
}

/// Sort a definition's right-hand side most plausibly has, used only for
/// display and wire resolution.
pub fn definition_sort(t: &Term) -> Option<Sort> {
    match t {
        Term::Ctx(_) => Some(Sort::Ctx),
        Term::TNum | Term::TBool | Term::TArrow(..) => Some(Sort::Type),
        Term::Atom(_) | Term::And(..) | Term::Or(..) | Term::Implies(..) | Term::Not(_) | Term::Falsum => {
            Some(Sort::Prop)
        }
        Term::Hole | Term::Abbrev(_) => None,
        _ => Some(Sort::Expr),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textio::{parse_judgment, parse_term};

    #[test]
    fn fresh_document_is_a_single_hole() {
        let d = new_document("alfa-eval").unwrap();
        assert_eq!(d.node_count(), 1);
        assert!(d.root.judgment.is_hole());
        assert_eq!(d.root.rule, RuleRef::Hole);
        assert_eq!(new_document("bogus").unwrap_err(), DocError::UnknownSystem("bogus".into()));
        d.validate().unwrap();
    }

    #[test]
    fn expansion_replaces_abbreviations() {
        let mut d = new_document("alfa-typing").unwrap();
        let g = parse_term(Sort::Ctx, "[x:Num]").unwrap();
        d.prelude.push(Definition {
            name: "G".into(),
            term: g.clone(),
            expanded: g,
        });
        let j = parse_judgment("$G |- x : Num", None).unwrap();
        assert_eq!(
            d.expand_judgment(&j).unwrap(),
            parse_judgment("[x:Num] |- x : Num", None).unwrap()
        );
        let unbound = parse_judgment("$H |- x : Num", None).unwrap();
        assert_eq!(d.expand_judgment(&unbound), Err(DocError::UnboundAbbrev("H".into())));
    }

    #[test]
    fn kind_must_match_system() {
        let d = new_document("alfa-eval").unwrap();
        let j = parse_judgment("[] |- 1 : Num", None).unwrap();
        assert!(matches!(d.check_judgment(&j), Err(DocError::SortMismatch { .. })));
    }

    #[test]
    fn node_ids_parse_back() {
        assert_eq!("n12".parse::<NodeId>(), Ok(NodeId(12)));
        assert!("12".parse::<NodeId>().is_err());
    }
}
