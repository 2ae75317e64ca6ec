//! Rule listing, search and documentation rendering.

use serde::Serialize;

use super::{Bindings, Locus, Rule, RuleSystem, SideCond};
use crate::term::{JudgmentKind, Path, Sort, Term};
use crate::textio::{judgment_pieces, print_judgment, print_term, Piece};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RuleSummary {
    pub name: String,
    pub category: String,
    pub arity: usize,
    /// One-line rendering: premises, then the conclusion.
    pub schema: String,
    pub doc: String,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RuleQueryError {
    #[error("unknown category `{category}`; known categories: {}", known.join(", "))]
    UnknownCategory { category: String, known: Vec<String> },
}

fn schema_line(r: &Rule) -> String {
    let premises: Vec<String> = r.premises.iter().map(print_judgment).collect();
    let mut line = if premises.is_empty() {
        String::new()
    } else {
        format!("{}  ==>  ", premises.join("  ;  "))
    };
    line.push_str(&print_judgment(&r.conclusion));
    for c in &r.side_conditions {
        line.push_str(&format!("  if {}", side_condition_text(c, r.conclusion.kind())));
    }
    line
}

/// Case-insensitive substring search over rule names and documentation,
/// optionally restricted to one category, in declaration order.
pub fn list_rules(
    sys: &RuleSystem,
    query: &str,
    category: Option<&str>,
) -> Result<Vec<RuleSummary>, RuleQueryError> {
    if let Some(c) = category {
        if !sys.categories.iter().any(|k| k == c) {
            return Err(RuleQueryError::UnknownCategory {
                category: c.to_string(),
                known: sys.categories.clone(),
            });
        }
    }
    let q = query.to_lowercase();
    Ok(sys
        .rules
        .iter()
        .filter(|r| category.is_none_or(|c| r.category == c))
        .filter(|r| r.name.to_lowercase().contains(&q) || r.doc.to_lowercase().contains(&q))
        .map(|r| RuleSummary {
            name: r.name.clone(),
            category: r.category.clone(),
            arity: r.arity(),
            schema: schema_line(r),
            doc: r.doc.clone(),
        })
        .collect())
}

/// Groups summaries by category, keeping first-appearance order.
pub fn group_by_category(rules: &[RuleSummary]) -> Vec<(String, Vec<RuleSummary>)> {
    let mut out: Vec<(String, Vec<RuleSummary>)> = Vec::new();
    for r in rules {
        match out.iter_mut().find(|(c, _)| *c == r.category) {
            Some((_, v)) => v.push(r.clone()),
            None => out.push((r.category.clone(), vec![r.clone()])),
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DocSpan {
    Text {
        text: String,
    },
    Meta {
        name: String,
        color: usize,
        #[serde(skip_serializing_if = "Option::is_none")]
        bound: Option<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MetavarDoc {
    pub name: String,
    pub sort: Sort,
    pub color: usize,
    pub premise_bound: bool,
    pub bound: Option<String>,
}

/// Rendered documentation for one rule, derived from the same schema the
/// verifier uses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Doc {
    pub rule: String,
    pub category: String,
    pub premises: Vec<Vec<DocSpan>>,
    pub conclusion: Vec<DocSpan>,
    pub side_conditions: Vec<Vec<DocSpan>>,
    pub metavars: Vec<MetavarDoc>,
    pub text: String,
}

impl Doc {
    /// Plain rendering; with `color` metavariables get ANSI colors.
    pub fn render(&self, color: bool) -> String {
        const PALETTE: &[u8] = &[31, 32, 33, 34, 35, 36];
        let line = |spans: &[DocSpan]| -> String {
            spans
                .iter()
                .map(|s| match s {
                    DocSpan::Text { text } => text.clone(),
                    DocSpan::Meta { name, color: c, .. } if color => {
                        format!("\x1b[{}m{name}\x1b[0m", PALETTE[c % PALETTE.len()])
                    }
                    DocSpan::Meta { name, .. } => name.clone(),
                })
                .collect()
        };
        let mut out = format!("{} ({})\n", self.rule, self.category);
        let premises: Vec<String> = self.premises.iter().map(|p| line(p)).collect();
        let conclusion = line(&self.conclusion);
        let top = premises.join("    ");
        let width = top.chars().count().max(conclusion.chars().count());
        if !top.is_empty() {
            out.push_str(&format!("  {top}\n"));
        }
        out.push_str(&format!("  {}\n", "-".repeat(width.max(4))));
        out.push_str(&format!("  {conclusion}\n"));
        for c in &self.side_conditions {
            out.push_str(&format!("  where {}\n", line(c)));
        }
        let bound: Vec<String> = self
            .metavars
            .iter()
            .filter_map(|m| m.bound.as_ref().map(|b| format!("  {} = {b}", m.name)))
            .collect();
        if !bound.is_empty() {
            out.push_str("bindings:\n");
            out.push_str(&bound.join("\n"));
            out.push('\n');
        }
        out.push_str(&format!("{}\n", self.text));
        out
    }
}

fn spans(pieces: Vec<Piece>, rule: &Rule, b: Option<&Bindings>) -> Vec<DocSpan> {
    pieces
        .into_iter()
        .map(|p| match p {
            Piece::Text(text) => DocSpan::Text { text },
            Piece::Meta(name) => DocSpan::Meta {
                color: rule.metavar(&name).map_or(0, |m| m.color),
                bound: b.and_then(|b| b.term(&name)).map(print_term),
                name,
            },
        })
        .collect()
}

fn side_condition_pieces(c: &SideCond, kind: Option<JudgmentKind>) -> Vec<Piece> {
    let m = |s: &str| Piece::Meta(s.to_string());
    let t = |s: &str| Piece::Text(s.to_string());
    match c {
        SideCond::Lookup {
            ctx,
            key,
            result: Some(r),
        } => vec![m(ctx), t("("), m(key), t(") = "), m(r)],
        SideCond::Lookup { ctx, key, .. } if kind == Some(JudgmentKind::Entail) => {
            vec![m(key), t(" in "), m(ctx)]
        }
        SideCond::Lookup { ctx, key, .. } => vec![m(key), t(" declared in "), m(ctx)],
        SideCond::Arith {
            result,
            left,
            right,
        } => vec![m(result), t(" = "), m(left), t(" + "), m(right)],
        SideCond::IsValue(v) => vec![m(v), t(" is a value")],
    }
}

fn side_condition_text(c: &SideCond, kind: Option<JudgmentKind>) -> String {
    side_condition_pieces(c, kind)
        .into_iter()
        .map(|p| match p {
            Piece::Text(s) | Piece::Meta(s) => s,
        })
        .collect()
}

/// Documentation for `rule`; with bindings, metavariables show their values.
pub fn rule_doc(rule: &Rule, bindings: Option<&Bindings>) -> Doc {
    let kind = rule.conclusion.kind();
    Doc {
        rule: rule.name.clone(),
        category: rule.category.clone(),
        premises: rule
            .premises
            .iter()
            .map(|p| spans(judgment_pieces(p), rule, bindings))
            .collect(),
        conclusion: spans(judgment_pieces(&rule.conclusion), rule, bindings),
        side_conditions: rule
            .side_conditions
            .iter()
            .map(|c| spans(side_condition_pieces(c, kind), rule, bindings))
            .collect(),
        metavars: rule
            .metavars
            .iter()
            .map(|m| MetavarDoc {
                name: m.name.clone(),
                sort: m.sort,
                color: m.color,
                premise_bound: m.premise_bound,
                bound: bindings.and_then(|b| b.term(&m.name)).map(print_term),
            })
            .collect(),
        text: rule.doc.clone(),
    }
}

/// Connects an error location to the part of the rule schema responsible.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ErrorLink {
    pub locus: Locus,
    /// Longest prefix of the error path that exists in the schema.
    pub schema_path: Path,
    /// Metavariables under that schema position.
    pub metavars: Vec<String>,
}

fn metas_in(t: &Term, out: &mut Vec<String>) {
    if let Term::Meta(m) = t {
        if !out.contains(&m.name) {
            out.push(m.name.clone());
        }
    }
    for c in t.children() {
        metas_in(c, out);
    }
}

/// Walks the schema judgment named by `locus` along `path` as far as it goes.
pub fn link_error(rule: &Rule, locus: Locus, path: &Path) -> Option<ErrorLink> {
    let schema = match locus {
        Locus::Conclusion => &rule.conclusion,
        Locus::Premise(i) => rule.premises.get(i)?,
        Locus::SideCondition(i) => {
            let c = rule.side_conditions.get(i)?;
            return Some(ErrorLink {
                locus,
                schema_path: Path::root(),
                metavars: c.metavars().into_iter().map(String::from).collect(),
            });
        }
        Locus::RuleApplication => return None,
    };
    let slots = schema.slots();
    let Some((&first, rest)) = path.0.split_first() else {
        let mut metavars = Vec::new();
        slots.iter().for_each(|s| metas_in(s, &mut metavars));
        return Some(ErrorLink {
            locus,
            schema_path: Path::root(),
            metavars,
        });
    };
    let mut t = *slots.get(first)?;
    let mut walked = vec![first];
    for &i in rest {
        match t {
            Term::Meta(_) => break,
            // entry indices of a spliced context do not line up with the schema
            Term::Ctx(entries) if matches!(entries.first(), Some(Term::Meta(m)) if m.sort == Sort::Ctx) => {
                break
            }
            _ => match t.child(i) {
                Some(c) => {
                    t = c;
                    walked.push(i);
                }
                None => break,
            },
        }
    }
    let mut metavars = Vec::new();
    metas_in(t, &mut metavars);
    Some(ErrorLink {
        locus,
        schema_path: Path(walked),
        metavars,
    })
}
