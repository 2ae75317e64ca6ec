//! JSON shapes sent to clients. A delta uses the same node payloads as the
//! full state, so patching a state with deltas reproduces a later state.

use std::collections::BTreeMap;

use deriver_core::document::{DerivNode, DerivationDoc, Feedback, RuleRef};
use deriver_core::textio::{print_judgment, print_term};
use deriver_core::verifier::{NodeStatus, TreeStatus, VerificationReport, VerifyError};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorPayload {
    pub locus: String,
    pub path: Vec<usize>,
    pub expected: String,
    pub found: String,
    pub message: String,
}

impl From<&VerifyError> for ErrorPayload {
    fn from(e: &VerifyError) -> Self {
        ErrorPayload {
            locus: e.locus.to_string(),
            path: e.path.0.clone(),
            expected: e.expected.clone(),
            found: e.found.clone(),
            message: e.message.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObligationPayload {
    pub locus: String,
    pub holes: Vec<Vec<usize>>,
    pub statement: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodePayload {
    pub id: String,
    pub judgment: String,
    /// Rule name, `use NAME`, or null for a rule hole.
    pub rule: Option<String>,
    pub children: Vec<String>,
    /// `correct`, `incorrect`, `indeterminate`, or `unresolved` in place of
    /// `incorrect` when feedback is silent.
    pub status: String,
    pub errors: Vec<ErrorPayload>,
    pub obligations: Vec<ObligationPayload>,
}

pub fn node_payload(n: &DerivNode, status: Option<&NodeStatus>, feedback: Feedback) -> NodePayload {
    let rule = match &n.rule {
        RuleRef::Hole => None,
        RuleRef::Rule(r) => Some(r.clone()),
        RuleRef::Subtree(s) => Some(format!("use {s}")),
    };
    let (status, errors, obligations) = match status {
        None => ("indeterminate".to_string(), vec![], vec![]),
        Some(s) => {
            let obligations = s
                .obligations()
                .iter()
                .map(|o| ObligationPayload {
                    locus: o.locus.to_string(),
                    holes: o.holes.iter().map(|h| h.0.clone()).collect(),
                    statement: o.statement.clone(),
                })
                .collect();
            match (s, feedback) {
                (NodeStatus::Incorrect(_), Feedback::Silent) => ("unresolved".to_string(), vec![], obligations),
                _ => (
                    s.label().to_string(),
                    s.errors().iter().map(ErrorPayload::from).collect(),
                    obligations,
                ),
            }
        }
    };
    NodePayload {
        id: n.id.to_string(),
        judgment: print_judgment(&n.judgment),
        rule,
        children: n.children.iter().map(|c| c.id.to_string()).collect(),
        status,
        errors,
        obligations,
    }
}

/// Tree status as shown to clients; silent documents do not reveal that an
/// error exists.
pub fn shown_tree_status(status: TreeStatus, feedback: Feedback) -> String {
    match (status, feedback) {
        (TreeStatus::HasErrors, Feedback::Silent) => "Unresolved".into(),
        (TreeStatus::CompleteCorrect, _) => "CompleteCorrect".into(),
        (TreeStatus::Incomplete, _) => "Incomplete".into(),
        (TreeStatus::HasErrors, _) => "HasErrors".into(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefinitionPayload {
    pub name: String,
    pub term: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubtreePayload {
    pub name: String,
    pub root: String,
    pub tree_status: String,
}

/// Document-level facts that every delta repeats in full; they are small.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outline {
    pub system: String,
    pub feedback: Feedback,
    pub tree_status: String,
    pub root: String,
    pub prelude: Vec<DefinitionPayload>,
    pub subtrees: Vec<SubtreePayload>,
}

pub fn outline(doc: &DerivationDoc, report: &VerificationReport) -> Outline {
    let fb = doc.feedback;
    Outline {
        system: doc.system.id.clone(),
        feedback: fb,
        tree_status: shown_tree_status(report.tree_status, fb),
        root: doc.root.id.to_string(),
        prelude: doc
            .prelude
            .iter()
            .map(|d| DefinitionPayload {
                name: d.name.clone(),
                term: print_term(&d.term),
            })
            .collect(),
        subtrees: doc
            .subtrees
            .iter()
            .map(|s| SubtreePayload {
                name: s.name.clone(),
                root: s.root.id.to_string(),
                tree_status: shown_tree_status(
                    report.subtrees.get(&s.name).copied().unwrap_or(TreeStatus::Incomplete),
                    fb,
                ),
            })
            .collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatePayload {
    pub session: String,
    #[serde(flatten)]
    pub outline: Outline,
    pub selected: Option<String>,
    pub can_undo: bool,
    pub can_redo: bool,
    pub nodes: BTreeMap<String, NodePayload>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaPayload {
    #[serde(flatten)]
    pub outline: Outline,
    pub can_undo: bool,
    pub can_redo: bool,
    pub changed: BTreeMap<String, NodePayload>,
    pub removed: Vec<String>,
}

impl StatePayload {
    /// Client-side delta application.
    pub fn apply(&mut self, delta: &DeltaPayload) {
        self.outline = delta.outline.clone();
        self.can_undo = delta.can_undo;
        self.can_redo = delta.can_redo;
        for id in &delta.removed {
            self.nodes.remove(id);
        }
        for (id, n) in &delta.changed {
            self.nodes.insert(id.clone(), n.clone());
        }
        if self.selected.as_ref().is_some_and(|s| !self.nodes.contains_key(s)) {
            self.selected = None;
        }
    }
}

pub fn all_nodes(doc: &DerivationDoc, report: &VerificationReport) -> BTreeMap<String, NodePayload> {
    doc.nodes()
        .into_iter()
        .map(|n| (n.id.to_string(), node_payload(n, report.status(n.id), doc.feedback)))
        .collect()
}
