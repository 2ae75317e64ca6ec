//! Text-level edit commands, as sent over the wire.
//!
//! Terms arrive as source text and node ids as `n7` strings. Resolving a
//! [`WireEdit`] against a document parses each term at the sort its target
//! position demands.

use serde::{Deserialize, Serialize};

use super::docfmt::parse_definition;
use super::lexer::Pos;
use super::parser::{parse_judgment, parse_term, ParseError};
use crate::document::{DerivationDoc, DocError, EditCommand, Feedback, NodeId};
use crate::term::{Path, PathError};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum WireEdit {
    SetRule { node: String, rule: String },
    ClearRule { node: String },
    AddPremise {
        node: String,
        #[serde(default)]
        position: Option<usize>,
    },
    RemovePremise { node: String, position: usize },
    EditJudgment { node: String, path: Vec<usize>, term: String },
    SetJudgment { node: String, judgment: String },
    FillHole { node: String, path: Vec<usize>, term: String },
    MakeHole { node: String, path: Vec<usize> },
    DefineAbbrev { name: String, term: String },
    RemoveAbbrev { name: String },
    DefineSubtree { name: String },
    RemoveSubtree { name: String },
    InsertSubtreeRef { node: String, subtree: String },
    SetFeedback { feedback: Feedback },
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum WireError {
    #[error("`{0}` is not a node id")]
    BadNodeId(String),
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Doc(#[from] DocError),
}

fn node_id(doc: &DerivationDoc, s: &str) -> Result<NodeId, WireError> {
    let id: NodeId = s.parse().map_err(|_| WireError::BadNodeId(s.to_string()))?;
    doc.node(id).ok_or(DocError::UnknownNode(id))?;
    Ok(id)
}

/// Parses `text` at the sort required by `path` in the node's judgment, or
/// in the system's skeleton when the judgment is still a hole.
fn term_at(doc: &DerivationDoc, id: NodeId, path: &Path, text: &str) -> Result<crate::term::Term, WireError> {
    let node = doc.node(id).ok_or(DocError::UnknownNode(id))?;
    let shape = if node.judgment.is_hole() {
        doc.system.kind.skeleton()
    } else {
        node.judgment.clone()
    };
    let sort = shape.sort_at(path).map_err(|e| match e {
        PathError::OutOfRange(path, prefix) => DocError::BadPath {
            path,
            reason: format!("no subterm at {prefix}"),
        },
        PathError::JudgmentRoot => DocError::BadPath {
            path: Path::root(),
            reason: "the empty path denotes the whole judgment".into(),
        },
    })?;
    Ok(parse_term(sort, text)?)
}

impl WireEdit {
    pub fn resolve(&self, doc: &DerivationDoc) -> Result<EditCommand, WireError> {
        use WireEdit as W;
        let kind = doc.system.kind;
        Ok(match self {
            W::SetRule { node, rule } => {
                // interactive clients may only pick rules of the system
                if doc.system.rule(rule).is_none() {
                    return Err(WireError::Doc(DocError::UnknownRule(rule.clone())));
                }
                EditCommand::SetRule {
                    node: node_id(doc, node)?,
                    rule: rule.clone(),
                }
            }
            W::ClearRule { node } => EditCommand::ClearRule {
                node: node_id(doc, node)?,
            },
            W::AddPremise { node, position } => EditCommand::AddPremise {
                node: node_id(doc, node)?,
                position: *position,
            },
            W::RemovePremise { node, position } => EditCommand::RemovePremise {
                node: node_id(doc, node)?,
                position: *position,
            },
            W::EditJudgment { node, path, term } => {
                let id = node_id(doc, node)?;
                let path = Path(path.clone());
                EditCommand::EditJudgment {
                    node: id,
                    term: term_at(doc, id, &path, term)?,
                    path,
                }
            }
            W::FillHole { node, path, term } => {
                let id = node_id(doc, node)?;
                let path = Path(path.clone());
                EditCommand::FillHole {
                    node: id,
                    term: term_at(doc, id, &path, term)?,
                    path,
                }
            }
            W::SetJudgment { node, judgment } => EditCommand::SetJudgment {
                node: node_id(doc, node)?,
                judgment: parse_judgment(judgment, Some(kind))?,
            },
            W::MakeHole { node, path } => EditCommand::MakeHole {
                node: node_id(doc, node)?,
                path: Path(path.clone()),
            },
            W::DefineAbbrev { name, term } => EditCommand::DefineAbbrev {
                name: name.clone(),
                term: parse_definition(kind, term, Pos { line: 1, col: 1 })?,
            },
            W::RemoveAbbrev { name } => EditCommand::RemoveAbbrev { name: name.clone() },
            W::DefineSubtree { name } => EditCommand::DefineSubtree { name: name.clone() },
            W::RemoveSubtree { name } => EditCommand::RemoveSubtree { name: name.clone() },
            W::InsertSubtreeRef { node, subtree } => EditCommand::InsertSubtreeRef {
                node: node_id(doc, node)?,
                subtree: subtree.clone(),
            },
            W::SetFeedback { feedback } => EditCommand::SetFeedback {
                feedback: *feedback,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::new_document;
    use crate::term::Term;

    #[test]
    fn fill_hole_parses_at_the_slot_sort() {
        let doc = new_document("alfa-typing").unwrap();
        let root = doc.root.id.to_string();
        let w: WireEdit = serde_json::from_str(&format!(
            r#"{{"op":"fill_hole","node":"{root}","path":[2],"term":"Num -> Bool"}}"#
        ))
        .unwrap();
        let EditCommand::FillHole { term, .. } = w.resolve(&doc).unwrap() else {
            panic!("wrong command")
        };
        assert_eq!(term, Term::arrow(Term::TNum, Term::TBool));
    }

    #[test]
    fn bad_ids_and_unknown_nodes_are_rejected() {
        let doc = new_document("alfa-eval").unwrap();
        let bad = WireEdit::ClearRule { node: "seven".into() };
        assert_eq!(bad.resolve(&doc), Err(WireError::BadNodeId("seven".into())));
        let missing = WireEdit::ClearRule { node: "n99".into() };
        assert_eq!(
            missing.resolve(&doc),
            Err(WireError::Doc(DocError::UnknownNode(NodeId(99))))
        );
    }

    #[test]
    fn malformed_term_is_a_parse_error() {
        let doc = new_document("alfa-eval").unwrap();
        let w = WireEdit::SetJudgment {
            node: doc.root.id.to_string(),
            judgment: "1 + evalto 2".into(),
        };
        assert!(matches!(w.resolve(&doc), Err(WireError::Parse(_))));
    }

    #[test]
    fn clients_may_only_pick_rules_of_the_system() {
        let doc = new_document("alfa-eval").unwrap();
        let node = doc.root.id.to_string();
        let w = WireEdit::SetRule { node: node.clone(), rule: "T-Num".into() };
        assert_eq!(w.resolve(&doc), Err(WireError::Doc(DocError::UnknownRule("T-Num".into()))));
        let ok = WireEdit::SetRule { node, rule: "E-Num".into() };
        assert!(ok.resolve(&doc).is_ok());
    }
}
