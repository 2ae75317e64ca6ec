//! In-memory editing sessions. Each session has a single writer (its mutex);
//! readers take the current immutable snapshot and release the lock at once.

use std::collections::{BTreeSet, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use deriver_core::document::{new_document, DerivationDoc, DocError, EditCommand, NodeId, RuleRef};
use deriver_core::rules::{link_error, list_rules, rule_doc, Doc, ErrorLink, RuleQueryError, RuleSummary};
use deriver_core::textio::{parse_document, print_document, DocParseError, SrcSpan, WireEdit, WireError};
use deriver_core::verifier::{apply_and_verify, verify_document, VerificationReport};
use serde::Serialize;

use crate::payload::{all_nodes, node_payload, outline, DeltaPayload, ErrorPayload, StatePayload};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("no session `{0}`")]
    UnknownSession(String),
    #[error("unknown system `{0}`")]
    UnknownSystem(String),
    #[error("{0}")]
    Parse(DocParseError),
    #[error(transparent)]
    Edit(#[from] WireError),
    #[error(transparent)]
    Query(#[from] RuleQueryError),
    #[error("nothing to undo")]
    NothingToUndo,
    #[error("nothing to redo")]
    NothingToRedo,
    #[error("{0}")]
    BadRequest(String),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownSession(_) => "UnknownSession",
            ServiceError::UnknownSystem(_) => "UnknownSystem",
            ServiceError::Parse(e) => e.code(),
            ServiceError::Edit(WireError::BadNodeId(_)) => "UnknownNode",
            ServiceError::Edit(WireError::Parse(_)) => "ParseError",
            ServiceError::Edit(WireError::Doc(e)) => e.code(),
            ServiceError::Query(_) => "UnknownCategory",
            ServiceError::NothingToUndo => "NothingToUndo",
            ServiceError::NothingToRedo => "NothingToRedo",
            ServiceError::BadRequest(_) => "BadRequest",
        }
    }

    /// Source position for errors in client-supplied text.
    pub fn span(&self) -> Option<SrcSpan> {
        match self {
            ServiceError::Parse(e) => Some(e.span()),
            ServiceError::Edit(WireError::Parse(e)) => Some(e.span),
            _ => None,
        }
    }
}

impl From<DocError> for ServiceError {
    fn from(e: DocError) -> Self {
        ServiceError::Edit(WireError::Doc(e))
    }
}

/// A document together with its verification; never mutated once shared.
#[derive(Debug)]
pub struct Snapshot {
    pub doc: DerivationDoc,
    pub report: VerificationReport,
}

struct Session {
    current: Arc<Snapshot>,
    undo: Vec<Arc<Snapshot>>,
    redo: Vec<Arc<Snapshot>>,
    selected: Option<NodeId>,
}

/// How a session starts.
pub enum Source<'a> {
    System(&'a str),
    Text(&'a str),
}

#[derive(Clone, Debug, Serialize)]
pub struct LinkedError {
    #[serde(flatten)]
    pub error: ErrorPayload,
    pub link: Option<ErrorLink>,
}

/// Documentation for a node's rule or for a bare rule name.
#[derive(Clone, Debug, Serialize)]
pub struct DocPayload {
    pub node: Option<String>,
    /// Null when the node has no applied rule.
    pub doc: Option<Doc>,
    pub errors: Vec<LinkedError>,
}

#[derive(Default)]
pub struct SessionStore {
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    counter: AtomicU64,
}

impl SessionStore {
    pub fn new() -> SessionStore {
        SessionStore::default()
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ServiceError> {
        self.sessions
            .read()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    pub fn snapshot(&self, id: &str) -> Result<Arc<Snapshot>, ServiceError> {
        Ok(self.session(id)?.lock().expect("session poisoned").current.clone())
    }

    pub fn create(&self, source: Source<'_>) -> Result<(String, StatePayload), ServiceError> {
        let doc = match source {
            Source::System(id) => new_document(id).map_err(|_| ServiceError::UnknownSystem(id.to_string()))?,
            Source::Text(text) => parse_document(text).map_err(|e| match e {
                DocParseError::UnknownSystem { name, .. } => ServiceError::UnknownSystem(name),
                other => ServiceError::Parse(other),
            })?,
        };
        let report = verify_document(&doc);
        let id = format!("s{}", self.counter.fetch_add(1, Ordering::Relaxed) + 1);
        let session = Session {
            current: Arc::new(Snapshot { doc, report }),
            undo: Vec::new(),
            redo: Vec::new(),
            selected: None,
        };
        self.sessions
            .write()
            .expect("session map poisoned")
            .insert(id.clone(), Arc::new(Mutex::new(session)));
        let state = self.state(&id)?;
        Ok((id, state))
    }

    pub fn drop_session(&self, id: &str) -> Result<(), ServiceError> {
        self.sessions
            .write()
            .expect("session map poisoned")
            .remove(id)
            .map(|_| ())
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    pub fn state(&self, id: &str) -> Result<StatePayload, ServiceError> {
        let s = self.session(id)?;
        let s = s.lock().expect("session poisoned");
        let snap = &s.current;
        Ok(StatePayload {
            session: id.to_string(),
            outline: outline(&snap.doc, &snap.report),
            selected: s.selected.map(|n| n.to_string()),
            can_undo: !s.undo.is_empty(),
            can_redo: !s.redo.is_empty(),
            nodes: all_nodes(&snap.doc, &snap.report),
        })
    }

    /// Resolves a wire edit against the current document and applies it.
    pub fn post_edit(&self, id: &str, edit: &WireEdit) -> Result<DeltaPayload, ServiceError> {
        let s = self.session(id)?;
        let mut s = s.lock().expect("session poisoned");
        let cmd = edit.resolve(&s.current.doc)?;
        apply_locked(&mut s, &cmd)
    }

    /// Applies an already-resolved command.
    pub fn post_command(&self, id: &str, cmd: &EditCommand) -> Result<DeltaPayload, ServiceError> {
        let s = self.session(id)?;
        let mut s = s.lock().expect("session poisoned");
        apply_locked(&mut s, cmd)
    }

    pub fn undo(&self, id: &str) -> Result<DeltaPayload, ServiceError> {
        let s = self.session(id)?;
        let mut s = s.lock().expect("session poisoned");
        let prev = s.undo.pop().ok_or(ServiceError::NothingToUndo)?;
        let cur = std::mem::replace(&mut s.current, prev);
        s.redo.push(cur.clone());
        Ok(diff_delta(&s, &cur))
    }

    pub fn redo(&self, id: &str) -> Result<DeltaPayload, ServiceError> {
        let s = self.session(id)?;
        let mut s = s.lock().expect("session poisoned");
        let next = s.redo.pop().ok_or(ServiceError::NothingToRedo)?;
        let cur = std::mem::replace(&mut s.current, next);
        s.undo.push(cur.clone());
        Ok(diff_delta(&s, &cur))
    }

    pub fn rules(&self, id: &str, query: &str, category: Option<&str>) -> Result<Vec<RuleSummary>, ServiceError> {
        let snap = self.snapshot(id)?;
        Ok(list_rules(&snap.doc.system, query, category)?)
    }

    /// Documentation for the rule applied at `node` with the node's current
    /// bindings and error cross-links, or unbound documentation for `rule`.
    /// Asking about a node also selects it.
    pub fn doc_for(&self, id: &str, node: Option<&str>, rule: Option<&str>) -> Result<DocPayload, ServiceError> {
        let s = self.session(id)?;
        let mut s = s.lock().expect("session poisoned");
        let snap = s.current.clone();
        let doc = &snap.doc;
        match (node, rule) {
            (Some(node), None) => {
                let nid = parse_node_id(doc, node)?;
                s.selected = Some(nid);
                let n = doc.node(nid).expect("checked above");
                let RuleRef::Rule(name) = &n.rule else {
                    return Ok(DocPayload {
                        node: Some(node.to_string()),
                        doc: None,
                        errors: vec![],
                    });
                };
                let r = doc
                    .system
                    .rule(name)
                    .ok_or_else(|| DocError::UnknownRule(name.clone()))?;
                let result = snap.report.nodes.get(&nid);
                let shown = node_payload(n, result.map(|r| &r.status), doc.feedback);
                let errors = result
                    .map(|res| res.status.errors())
                    .unwrap_or_default()
                    .iter()
                    .zip(shown.errors)
                    .map(|(e, error)| LinkedError {
                        error,
                        link: link_error(r, e.locus, &e.path),
                    })
                    .collect();
                Ok(DocPayload {
                    node: Some(node.to_string()),
                    doc: Some(rule_doc(r, result.map(|res| &res.bindings))),
                    errors,
                })
            }
            (None, Some(name)) => {
                let r = doc
                    .system
                    .rule(name)
                    .ok_or_else(|| DocError::UnknownRule(name.to_string()))?;
                Ok(DocPayload {
                    node: None,
                    doc: Some(rule_doc(r, None)),
                    errors: vec![],
                })
            }
            _ => Err(ServiceError::BadRequest("give exactly one of `node` and `rule`".into())),
        }
    }

    pub fn export(&self, id: &str) -> Result<String, ServiceError> {
        Ok(print_document(&self.snapshot(id)?.doc))
    }
}

fn parse_node_id(doc: &DerivationDoc, text: &str) -> Result<NodeId, ServiceError> {
    text.strip_prefix('n')
        .and_then(|n| n.parse().ok())
        .map(NodeId)
        .filter(|id| doc.node(*id).is_some())
        .ok_or_else(|| ServiceError::Edit(WireError::BadNodeId(text.to_string())))
}

fn apply_locked(s: &mut Session, cmd: &EditCommand) -> Result<DeltaPayload, ServiceError> {
    let before = s.current.clone();
    let update = apply_and_verify(&before.doc, &before.report, cmd)?;
    let feedback_changed = update.doc.feedback != before.doc.feedback;
    let next = Arc::new(Snapshot {
        doc: update.doc,
        report: update.report,
    });
    s.undo.push(before);
    s.redo.clear();
    s.current = next;
    if s.selected.is_some_and(|n| update.removed.contains(&n)) {
        s.selected = None;
    }
    let snap = &s.current;
    let changed: BTreeSet<NodeId> = if feedback_changed {
        // every payload depends on the feedback mode
        snap.doc.node_ids()
    } else {
        update.affected
    };
    Ok(DeltaPayload {
        outline: outline(&snap.doc, &snap.report),
        can_undo: true,
        can_redo: false,
        changed: changed
            .into_iter()
            .filter_map(|id| {
                let n = snap.doc.node(id)?;
                Some((id.to_string(), node_payload(n, snap.report.status(id), snap.doc.feedback)))
            })
            .collect(),
        removed: update.removed.iter().map(|n| n.to_string()).collect(),
    })
}

/// Delta between an earlier snapshot and the session's current one, found
/// by comparing payloads (undo and redo can jump arbitrarily far).
fn diff_delta(s: &Session, from: &Snapshot) -> DeltaPayload {
    let old = all_nodes(&from.doc, &from.report);
    let new = all_nodes(&s.current.doc, &s.current.report);
    DeltaPayload {
        outline: outline(&s.current.doc, &s.current.report),
        can_undo: !s.undo.is_empty(),
        can_redo: !s.redo.is_empty(),
        removed: old.keys().filter(|k| !new.contains_key(*k)).cloned().collect(),
        changed: new.into_iter().filter(|(k, v)| old.get(k) != Some(v)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use deriver_core::term::Term;

    const E_PLUS: &str = "system alfa-eval\nderive:\n  1 + 2 evalto 3  by E-Plus\n    1 evalto 1  by E-Num\n    2 evalto 2  by E-Num\n";

    fn set_rule(node: &str, rule: &str) -> WireEdit {
        WireEdit::SetRule {
            node: node.into(),
            rule: rule.into(),
        }
    }

    #[test]
    fn fresh_session_has_one_open_node() {
        let store = SessionStore::new();
        let (_, state) = store.create(Source::System("alfa-typing")).unwrap();
        assert_eq!(state.nodes.len(), 1);
        assert_eq!(state.nodes.values().next().unwrap().status, "indeterminate");
        assert_eq!(state.outline.tree_status, "Incomplete");
    }

    #[test]
    fn golden_text_session_is_complete() {
        let store = SessionStore::new();
        let (_, state) = store.create(Source::Text(E_PLUS)).unwrap();
        assert_eq!(state.outline.tree_status, "CompleteCorrect");
    }

    #[test]
    fn bogus_system_is_rejected() {
        let store = SessionStore::new();
        let err = store.create(Source::Text("system bogus\nderive:\n  ?  by ?\n")).unwrap_err();
        assert_eq!(err.code(), "UnknownSystem");
        let err = store.create(Source::System("bogus")).unwrap_err();
        assert_eq!(err.code(), "UnknownSystem");
    }

    #[test]
    fn set_rule_reports_the_node_and_its_new_premises() {
        let store = SessionStore::new();
        let (id, state) = store.create(Source::System("alfa-eval")).unwrap();
        let delta = store.post_edit(&id, &set_rule(&state.outline.root, "E-Plus")).unwrap();
        assert_eq!(delta.changed.len(), 3);
        assert_eq!(delta.outline.tree_status, "Incomplete");
    }

    #[test]
    fn dead_sessions_are_reported() {
        let store = SessionStore::new();
        let (id, _) = store.create(Source::System("alfa-eval")).unwrap();
        store.drop_session(&id).unwrap();
        assert_eq!(store.post_edit(&id, &set_rule("n1", "E-Num")).unwrap_err().code(), "UnknownSession");
        assert_eq!(store.export(&id).unwrap_err().code(), "UnknownSession");
    }

    #[test]
    fn rejected_edits_leave_the_session_alone() {
        let store = SessionStore::new();
        let (id, before) = store.create(Source::Text(E_PLUS)).unwrap();
        let err = store
            .post_edit(&id, &WireEdit::RemovePremise { node: "n1".into(), position: 9 })
            .unwrap_err();
        assert!(!err.to_string().is_empty());
        assert_eq!(store.state(&id).unwrap(), before);
        assert_eq!(store.undo(&id).unwrap_err().code(), "NothingToUndo");
    }

    #[test]
    fn undo_restores_the_exact_text_and_redo_replays() {
        let store = SessionStore::new();
        let (id, _) = store.create(Source::Text(E_PLUS)).unwrap();
        let text = store.export(&id).unwrap();
        store
            .post_command(
                &id,
                &EditCommand::EditJudgment {
                    node: NodeId(1),
                    path: deriver_core::term::Path(vec![1]),
                    term: Term::num(4),
                },
            )
            .unwrap();
        let edited = store.export(&id).unwrap();
        let undo = store.undo(&id).unwrap();
        assert_eq!(store.export(&id).unwrap(), text);
        assert!(undo.can_redo && !undo.can_undo);
        store.redo(&id).unwrap();
        assert_eq!(store.export(&id).unwrap(), edited);
        assert_eq!(store.redo(&id).unwrap_err().code(), "NothingToRedo");
    }

    #[test]
    fn bound_documentation_for_a_node() {
        let store = SessionStore::new();
        let (id, _) = store.create(Source::Text(E_PLUS)).unwrap();
        let p = store.doc_for(&id, Some("n1"), None).unwrap();
        let doc = p.doc.unwrap();
        assert!(doc.metavars.iter().any(|m| m.bound.as_deref() == Some("1")));
        assert_eq!(store.state(&id).unwrap().selected.as_deref(), Some("n1"));
        let bare = store.doc_for(&id, None, Some("E-Plus")).unwrap().doc.unwrap();
        assert!(bare.metavars.iter().all(|m| m.bound.is_none()));
        assert_eq!(store.doc_for(&id, Some("n99"), None).unwrap_err().code(), "UnknownNode");
        assert_eq!(store.doc_for(&id, None, Some("Nope")).unwrap_err().code(), "UnknownRule");
    }
}
