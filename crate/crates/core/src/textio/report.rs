//! Human and JSON renderings of a verification report.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use super::docfmt::{DocParseError, SpanMap};
use super::printer::print_judgment;
use crate::document::{DerivNode, DerivationDoc, RuleRef};
use crate::verifier::{TreeStatus, VerificationReport, VerifyError};

/// Nodes in document order: subtrees first, then the root tree, preorder.
fn document_order(doc: &DerivationDoc) -> Vec<&DerivNode> {
    let mut out = Vec::new();
    for (_, tree) in doc.trees() {
        tree.walk(&mut |n| out.push(n));
    }
    out
}

fn error_json(e: &VerifyError) -> Value {
    json!({
        "locus": e.locus,
        "path": e.path,
        "expected": e.expected,
        "found": e.found,
        "message": e.message,
    })
}

/// Machine-readable report; `nodes` is keyed by node label (`derive.0.1`).
pub fn json_report(
    file: &str,
    doc: &DerivationDoc,
    spans: &SpanMap,
    report: &VerificationReport,
) -> Value {
    let mut nodes = Map::new();
    for n in document_order(doc) {
        let Some(result) = report.nodes.get(&n.id) else {
            continue;
        };
        let rule = match &n.rule {
            RuleRef::Hole => Value::Null,
            RuleRef::Rule(r) => Value::String(r.clone()),
            RuleRef::Subtree(s) => Value::String(format!("use {s}")),
        };
        let obligations: Vec<Value> = result
            .status
            .obligations()
            .iter()
            .map(|o| json!({"locus": o.locus, "holes": o.holes, "statement": o.statement}))
            .collect();
        let label = doc.node_label(n.id).unwrap_or_else(|| n.id.to_string());
        nodes.insert(
            label,
            json!({
                "id": n.id,
                "line": spans.get(&n.id).map(|s| s.start.line),
                "judgment": print_judgment(&n.judgment),
                "rule": rule,
                "status": result.status.label(),
                "errors": result.status.errors().iter().map(error_json).collect::<Vec<_>>(),
                "obligations": obligations,
            }),
        );
    }
    json!({
        "file": file,
        "system": doc.system.id,
        "tree_status": report.tree_status,
        "subtrees": report.subtrees,
        "nodes": nodes,
    })
}

pub fn json_parse_error(file: &str, err: &DocParseError) -> Value {
    let span = err.span();
    json!({
        "file": file,
        "error": err.code(),
        "line": span.start.line,
        "column": span.start.col,
        "message": err.to_string(),
    })
}

fn paint(s: &str, code: &str, color: bool) -> String {
    if color {
        format!("\x1b[{code}m{s}\x1b[0m")
    } else {
        s.to_string()
    }
}

pub fn status_line(status: TreeStatus, nodes: usize, color: bool) -> String {
    let (word, code) = match status {
        TreeStatus::CompleteCorrect => ("CompleteCorrect", "32"),
        TreeStatus::Incomplete => ("Incomplete", "33"),
        TreeStatus::HasErrors => ("HasErrors", "31"),
    };
    format!("{} ({nodes} nodes)", paint(word, code, color))
}

/// One `file:line:col: [node] message` line per error, in document order,
/// followed by the tree status line.
pub fn human_report(
    file: &str,
    doc: &DerivationDoc,
    spans: &SpanMap,
    report: &VerificationReport,
    color: bool,
) -> String {
    let mut out = String::new();
    for n in document_order(doc) {
        let Some(result) = report.nodes.get(&n.id) else {
            continue;
        };
        let label = doc.node_label(n.id).unwrap_or_else(|| n.id.to_string());
        let (line, col) = spans
            .get(&n.id)
            .map_or((0, 0), |s| (s.start.line, s.start.col));
        for e in result.status.errors() {
            let _ = writeln!(
                out,
                "{file}:{line}:{col}: [{}] {}",
                paint(&label, "1", color),
                e.message
            );
        }
    }
    out.push_str(&status_line(report.tree_status, doc.node_count(), color));
    out.push('\n');
    out
}

pub fn human_parse_error(file: &str, err: &DocParseError) -> String {
    let span = err.span();
    let detail = match err {
        DocParseError::Syntax(e) => {
            let s = e.to_string();
            // drop the position prefix, it is already in front
            s.split_once(": ").map_or(s.clone(), |(_, rest)| rest.to_string())
        }
        DocParseError::Indent { message, .. } => message.clone(),
        DocParseError::Invariant { error, .. } => error.to_string(),
        DocParseError::UnknownSystem { name, .. } => format!("unknown rule system `{name}`"),
    };
    format!(
        "{file}:{}:{}: [{}] {detail}\n",
        span.start.line,
        span.start.col,
        err.code()
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textio::parse_document_with_spans;
    use crate::verifier::verify_document;

    const BROKEN: &str = "system alfa-eval\nderive:\n  1 + 2 evalto 4  by E-Plus\n    1 evalto 1  by E-Num\n    2 evalto 2  by E-Num\n";

    #[test]
    fn human_report_positions_errors_at_the_node_line() {
        let (doc, spans) = parse_document_with_spans(BROKEN).unwrap();
        let report = verify_document(&doc);
        let text = human_report("b.deriv", &doc, &spans, &report, false);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("b.deriv:3:3: [derive] Expected `3`"), "{}", lines[0]);
        assert_eq!(lines[1], "HasErrors (3 nodes)");
    }

    #[test]
    fn json_report_uses_the_documented_field_names() {
        let (doc, spans) = parse_document_with_spans(BROKEN).unwrap();
        let v = json_report("b.deriv", &doc, &spans, &verify_document(&doc));
        assert_eq!(v["tree_status"], "HasErrors");
        let root = &v["nodes"]["derive"];
        assert_eq!(root["status"], "incorrect");
        let e = &root["errors"][0];
        assert_eq!(e["locus"], "SideCondition(0)");
        assert_eq!(e["path"], json!([1]));
        for k in ["expected", "found", "message"] {
            assert!(e[k].is_string());
        }
        assert_eq!(v["nodes"]["derive.1"]["status"], "correct");
    }

    #[test]
    fn parse_errors_render_with_code() {
        let err = crate::textio::parse_document("system alfa-eval\nderive:\n  1 evalto\n").unwrap_err();
        let line = human_parse_error("x.deriv", &err);
        assert!(line.starts_with("x.deriv:3:"), "{line}");
        assert!(line.contains("[ParseError]"));
        assert_eq!(json_parse_error("x.deriv", &err)["error"], "ParseError");
    }
}
