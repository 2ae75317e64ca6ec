//! The line-oriented `.deriv` document format.
//!
//! ```text
//! system alfa-eval
//! def v = 3
//! subtree S1:
//!   1 evalto 1  by E-Num
//! derive:
//!   1 + 2 evalto $v  by E-Plus
//!     1 evalto 1  by use S1
//!     2 evalto 2  by E-Num
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::lexer::{Pos, SrcSpan};
use super::parser::{parse_judgment_at, parse_term_at, ParseError};
use super::printer::{print_judgment, print_term};
use super::is_identifier;
use crate::document::{
    apply_edit, definition_sorts, DerivNode, DerivationDoc, DocError, EditCommand, Feedback, NodeId, Owner,
    RuleRef, SubtreeDef,
};
use crate::rules::builtin_system;
use crate::term::{JudgmentKind, Term};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DocParseError {
    #[error("{0}")]
    Syntax(#[from] ParseError),
    #[error("{span}: {message}")]
    Indent { span: SrcSpan, message: String },
    #[error("{span}: {error}")]
    Invariant { span: SrcSpan, error: DocError },
    #[error("{span}: unknown rule system `{name}`")]
    UnknownSystem { span: SrcSpan, name: String },
}

impl DocParseError {
    pub fn span(&self) -> SrcSpan {
        match self {
            DocParseError::Syntax(e) => e.span,
            DocParseError::Indent { span, .. }
            | DocParseError::Invariant { span, .. }
            | DocParseError::UnknownSystem { span, .. } => *span,
        }
    }

    /// Stable machine-readable name of the error class.
    pub fn code(&self) -> &'static str {
        match self {
            DocParseError::Syntax(_) => "ParseError",
            DocParseError::Indent { .. } => "IndentError",
            DocParseError::Invariant { error, .. } => error.code(),
            DocParseError::UnknownSystem { .. } => "UnknownSystem",
        }
    }
}

/// Source location of every node line, for positioned reports.
pub type SpanMap = BTreeMap<NodeId, SrcSpan>;

pub fn parse_document(text: &str) -> Result<DerivationDoc, DocParseError> {
    parse_document_with_spans(text).map(|(d, _)| d)
}

/// A significant source line: comment stripped, trailing space trimmed.
struct Line<'a> {
    no: usize,
    indent: usize,
    body: &'a str,
}

impl Line<'_> {
    fn span(&self) -> SrcSpan {
        let start = self.indent + 1;
        SrcSpan::line(self.no, start, start + self.body.chars().count())
    }

    fn pos(&self, offset_chars: usize) -> Pos {
        Pos {
            line: self.no,
            col: self.indent + 1 + offset_chars,
        }
    }

    fn syntax(&self, offset_chars: usize, expected: &[&str], found: &str) -> DocParseError {
        DocParseError::Syntax(ParseError {
            span: SrcSpan::point(self.pos(offset_chars)),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: found.to_string(),
        })
    }
}

fn significant_lines(text: &str) -> Result<Vec<Line<'_>>, DocParseError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let code = raw.split('#').next().unwrap_or("").trim_end();
        if code.trim().is_empty() {
            continue;
        }
        let indent = code.chars().take_while(|c| *c == ' ').count();
        if code[indent..].starts_with(|c: char| c.is_whitespace()) {
            return Err(DocParseError::Indent {
                span: SrcSpan::point(Pos { line: no, col: indent + 1 }),
                message: "indentation must use spaces only".into(),
            });
        }
        out.push(Line {
            no,
            indent,
            body: &code[indent..],
        });
    }
    Ok(out)
}

fn first_word(s: &str) -> &str {
    s.split_whitespace().next().unwrap_or("")
}

/// Parses an abbreviation body, trying the sorts a definition can have in
/// the given system. The error reported is the one that got furthest.
pub(crate) fn parse_definition(
    kind: JudgmentKind,
    text: &str,
    base: Pos,
) -> Result<Term, ParseError> {
    let sorts = definition_sorts(kind);
    let mut best: Option<ParseError> = None;
    for sort in sorts {
        match parse_term_at(*sort, text, base) {
            Ok(t) => return Ok(t),
            Err(e) => {
                if best.as_ref().is_none_or(|b| e.span.start > b.span.start) {
                    best = Some(e);
                }
            }
        }
    }
    Err(best.expect("at least one sort was tried"))
}

/// Splits `judgment  by rule` at the last standalone `by`.
fn split_by(body: &str) -> Option<(&str, &str)> {
    let bytes = body.as_bytes();
    let mut found = None;
    let mut from = 0;
    while let Some(i) = body[from..].find("by") {
        let at = from + i;
        let before_ok = at > 0 && bytes[at - 1].is_ascii_whitespace();
        let after_ok = bytes.get(at + 2).is_some_and(|b| b.is_ascii_whitespace());
        if before_ok && after_ok {
            found = Some(at);
        }
        from = at + 2;
    }
    found.map(|at| (body[..at].trim_end(), body[at + 2..].trim()))
}

struct Builder<'a> {
    doc: DerivationDoc,
    kind: JudgmentKind,
    spans: SpanMap,
    lines: &'a [Line<'a>],
    pos: usize,
}

impl<'a> Builder<'a> {
    fn peek(&self) -> Option<&'a Line<'a>> {
        self.lines.get(self.pos)
    }

    fn node_line(&mut self, line: &Line<'_>) -> Result<DerivNode, DocParseError> {
        let Some((jtext, rtext)) = split_by(line.body) else {
            let end = line.body.chars().count();
            return Err(line.syntax(end, &["by"], "end of line"));
        };
        let judgment = parse_judgment_at(jtext, Some(self.kind), line.pos(0))?;
        let rule_offset = line.body.len() - rtext.len();
        let rule_col = line.body[..rule_offset].chars().count();
        let mut words = rtext.split_whitespace();
        let rule = match (words.next(), words.next(), words.next()) {
            (Some("?"), None, _) => RuleRef::Hole,
            (Some("use"), Some(name), None) if is_identifier(name) => {
                RuleRef::Subtree(name.to_string())
            }
            (Some("use"), other, _) => {
                return Err(line.syntax(rule_col + 4, &["subtree name"], other.unwrap_or("end of line")))
            }
            (Some(name), None, _) if !name.contains(char::is_whitespace) => {
                RuleRef::Rule(name.to_string())
            }
            _ => return Err(line.syntax(rule_col, &["rule name", "?", "use"], rtext)),
        };
        let id = self.doc.fresh_id();
        self.spans.insert(id, line.span());
        Ok(DerivNode {
            id,
            judgment,
            rule,
            children: Vec::new(),
        })
    }

    /// Parses the single tree of a block whose node lines start at `base`
    /// columns of indentation.
    fn tree(&mut self, header: &Line<'_>) -> Result<DerivNode, DocParseError> {
        let base = 2;
        let mut stack: Vec<DerivNode> = Vec::new();
        let mut roots: Vec<DerivNode> = Vec::new();
        while let Some(line) = self.peek() {
            if line.indent == 0 {
                break;
            }
            self.pos += 1;
            if line.indent < base || (line.indent - base) % 2 != 0 {
                return Err(DocParseError::Indent {
                    span: SrcSpan::point(Pos { line: line.no, col: 1 }),
                    message: format!(
                        "indentation of {} spaces is not a multiple of 2 within the block",
                        line.indent
                    ),
                });
            }
            let depth = (line.indent - base) / 2;
            if depth > stack.len() {
                return Err(DocParseError::Indent {
                    span: SrcSpan::point(Pos { line: line.no, col: 1 }),
                    message: format!(
                        "line is indented {} levels deeper than its parent",
                        depth - stack.len() + 1
                    ),
                });
            }
            let node = self.node_line(line)?;
            fold_stack(&mut stack, depth, &mut roots);
            if depth == 0 && !roots.is_empty() {
                return Err(self.invariant(
                    line,
                    DocError::IllegalEdit("a block holds exactly one root derivation".into()),
                ));
            }
            stack.push(node);
        }
        fold_stack(&mut stack, 0, &mut roots);
        match roots.pop() {
            Some(r) => Ok(r),
            None => Err(self.invariant(
                header,
                DocError::IllegalEdit("a block holds exactly one root derivation".into()),
            )),
        }
    }

    fn invariant(&self, line: &Line<'_>, error: DocError) -> DocParseError {
        DocParseError::Invariant {
            span: line.span(),
            error,
        }
    }

    /// Checks every node of a tree, reporting at the offending line.
    fn check_tree(&self, owner: &Owner, tree: &DerivNode) -> Result<(), DocParseError> {
        let mut result = Ok(());
        tree.walk(&mut |n| {
            if result.is_ok() {
                if let Err(error) = self.doc.check_node(owner, n) {
                    result = Err(DocParseError::Invariant {
                        span: self.spans[&n.id],
                        error,
                    });
                }
            }
        });
        result
    }
}

/// Pops nodes deeper than `depth` into their parents.
fn fold_stack(stack: &mut Vec<DerivNode>, depth: usize, roots: &mut Vec<DerivNode>) {
    while stack.len() > depth {
        let n = stack.pop().expect("non-empty stack");
        match stack.last_mut() {
            Some(parent) => parent.children.push(n),
            None => roots.push(n),
        }
    }
}

/// Parses a document and records where each node was written.
pub fn parse_document_with_spans(text: &str) -> Result<(DerivationDoc, SpanMap), DocParseError> {
    let lines = significant_lines(text)?;
    let Some(head) = lines.first() else {
        let end = Pos {
            line: text.lines().count().max(1),
            col: 1,
        };
        return Err(DocParseError::Syntax(ParseError {
            span: SrcSpan::point(end),
            expected: vec!["system".into()],
            found: "end of input".into(),
        }));
    };
    if head.indent != 0 || first_word(head.body) != "system" {
        return Err(head.syntax(0, &["system"], first_word(head.body)));
    }
    let id = head.body["system".len()..].trim();
    if id.is_empty() || id.contains(char::is_whitespace) {
        return Err(head.syntax(7, &["rule system id"], if id.is_empty() { "end of line" } else { id }));
    }
    let system = builtin_system(id).ok_or_else(|| DocParseError::UnknownSystem {
        span: head.span(),
        name: id.to_string(),
    })?;
    let kind = system.kind;
    let mut b = Builder {
        doc: DerivationDoc::with_system(system),
        kind,
        spans: SpanMap::new(),
        lines: &lines,
        pos: 1,
    };
    let mut root = None;
    while let Some(line) = b.peek() {
        b.pos += 1;
        if line.indent != 0 {
            return Err(DocParseError::Indent {
                span: SrcSpan::point(Pos { line: line.no, col: 1 }),
                message: "node lines must follow a `subtree` or `derive` header".into(),
            });
        }
        if root.is_some() {
            return Err(line.syntax(0, &["end of input"], first_word(line.body)));
        }
        let word = first_word(line.body);
        match word {
            "feedback" => {
                let rest = line.body["feedback".len()..].trim();
                b.doc.feedback = match rest {
                    "silent" => Feedback::Silent,
                    "full" => Feedback::Full,
                    other => return Err(line.syntax(9, &["silent", "full"], other)),
                };
            }
            "def" => {
                let rest = &line.body[3..];
                let Some(eq) = rest.find('=') else {
                    return Err(line.syntax(line.body.chars().count(), &["="], "end of line"));
                };
                let name = rest[..eq].trim();
                if !is_identifier(name) {
                    return Err(line.syntax(4, &["abbreviation name"], name));
                }
                let offset = 3 + eq + 1;
                let body = &line.body[offset..];
                let term = parse_definition(kind, body, line.pos(line.body[..offset].chars().count()))?;
                let cmd = EditCommand::DefineAbbrev {
                    name: name.to_string(),
                    term,
                };
                b.doc = apply_edit(&b.doc, &cmd).map_err(|e| b.invariant(line, e))?;
            }
            "subtree" => {
                let Some(name) = line.body["subtree".len()..].trim().strip_suffix(':') else {
                    return Err(line.syntax(line.body.chars().count(), &[":"], "end of line"));
                };
                let name = name.trim();
                if !is_identifier(name) {
                    return Err(line.syntax(8, &["subtree name"], name));
                }
                if b.doc.subtree_index(name).is_some() {
                    return Err(b.invariant(line, DocError::DuplicateName(name.to_string())));
                }
                let tree = b.tree(line)?;
                b.doc.subtrees.push(SubtreeDef {
                    name: name.to_string(),
                    root: tree,
                });
            }
            "derive:" if line.body == "derive:" => {
                root = Some(b.tree(line)?);
            }
            other => {
                return Err(line.syntax(0, &["def", "subtree", "derive:", "feedback"], other));
            }
        }
    }
    let Some(root) = root else {
        let last = lines.last().expect("header line exists");
        return Err(DocParseError::Syntax(ParseError {
            span: SrcSpan::point(Pos {
                line: last.no + 1,
                col: 1,
            }),
            expected: vec!["derive:".into()],
            found: "end of input".into(),
        }));
    };
    b.doc.root = root;
    // checked once every subtree name is known, so early uses of later
    // subtrees are reported as forward references
    for (owner, tree) in b.doc.trees() {
        b.check_tree(&owner, tree)?;
    }
    debug_assert!(b.doc.validate().is_ok());
    Ok((b.doc, b.spans))
}

fn print_tree(out: &mut String, n: &DerivNode, depth: usize) {
    let rule = match &n.rule {
        RuleRef::Hole => "?".to_string(),
        RuleRef::Rule(r) => r.clone(),
        RuleRef::Subtree(s) => format!("use {s}"),
    };
    let _ = writeln!(
        out,
        "{:indent$}{}  by {}",
        "",
        print_judgment(&n.judgment),
        rule,
        indent = 2 * (depth + 1)
    );
    for c in &n.children {
        print_tree(out, c, depth + 1);
    }
}

/// Canonical text of a document.
pub fn print_document(doc: &DerivationDoc) -> String {
    let mut out = format!("system {}\n", doc.system.id);
    if doc.feedback == Feedback::Silent {
        out.push_str("feedback silent\n");
    }
    for d in &doc.prelude {
        let _ = writeln!(out, "def {} = {}", d.name, print_term(&d.term));
    }
    for s in &doc.subtrees {
        let _ = writeln!(out, "subtree {}:", s.name);
        print_tree(&mut out, &s.root, 0);
    }
    out.push_str("derive:\n");
    print_tree(&mut out, &doc.root, 0);
    out
}
