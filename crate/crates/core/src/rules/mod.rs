//! Inference rules as schemas over metavariables.

mod builtin;
mod doc;
mod matching;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::term::{Judgment, JudgmentKind, Sort, Term};
use crate::textio::{parse_schema, ParseError};

pub use builtin::{builtin_system, builtin_systems, BUILTIN_IDS};
pub use doc::{
    group_by_category, link_error, list_rules, rule_doc, Doc, DocSpan, ErrorLink, MetavarDoc,
    RuleQueryError, RuleSummary,
};
pub use matching::{
    check_side_condition, instantiate, match_schema, Binding, Bindings, MatchResult, Mismatch,
    MismatchKind, Origin,
};
pub(crate) use matching::{eval_side_condition, Matcher, SideOutcome};

/// Where in a rule application a diagnostic applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Locus {
    Conclusion,
    Premise(usize),
    RuleApplication,
    SideCondition(usize),
}

impl fmt::Display for Locus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Locus::Conclusion => write!(f, "Conclusion"),
            Locus::Premise(i) => write!(f, "Premise({i})"),
            Locus::RuleApplication => write!(f, "RuleApplication"),
            Locus::SideCondition(i) => write!(f, "SideCondition({i})"),
        }
    }
}

impl Serialize for Locus {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MetavarDecl {
    pub name: String,
    pub sort: Sort,
    /// Palette index, by first occurrence in conclusion then premises.
    pub color: usize,
    /// First bound by matching a premise rather than the conclusion.
    pub premise_bound: bool,
}

/// Non-structural requirement attached to a rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SideCond {
    /// `ctx(key) = result` for typing, `key ∈ ctx` for logic (`result: None`).
    Lookup {
        ctx: String,
        key: String,
        result: Option<String>,
    },
    /// `result = left + right` over integer literals.
    Arith {
        result: String,
        left: String,
        right: String,
    },
    IsValue(String),
}

impl SideCond {
    pub fn metavars(&self) -> Vec<&str> {
        match self {
            SideCond::Lookup { ctx, key, result } => {
                let mut v = vec![ctx.as_str(), key.as_str()];
                v.extend(result.as_deref());
                v
            }
            SideCond::Arith {
                result,
                left,
                right,
            } => vec![result, left, right],
            SideCond::IsValue(m) => vec![m],
        }
    }

    /// Metavariables that must be bound before the condition can be decided.
    fn inputs(&self) -> Vec<&str> {
        match self {
            SideCond::Lookup { ctx, key, .. } => vec![ctx, key],
            other => other.metavars(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub category: String,
    pub metavars: Vec<MetavarDecl>,
    pub premises: Vec<Judgment>,
    pub conclusion: Judgment,
    pub side_conditions: Vec<SideCond>,
    pub doc: String,
}

impl Rule {
    pub fn arity(&self) -> usize {
        self.premises.len()
    }

    pub fn metavar(&self, name: &str) -> Option<&MetavarDecl> {
        self.metavars.iter().find(|m| m.name == name)
    }

    /// Checks metavariable scoping: every metavariable is declared, a
    /// metavariable first seen in a premise is marked premise-bound,
    /// substitution and side-condition inputs are bound beforehand, and
    /// context splices only appear first in a context.
    pub fn audit(&self) -> Result<(), RuleError> {
        let err = |kind: RuleErrorKind| RuleError {
            rule: self.name.clone(),
            kind,
        };
        let mut seen = HashMap::new();
        for m in &self.metavars {
            if seen.insert(m.name.as_str(), m.sort).is_some() {
                return Err(err(RuleErrorKind::DuplicateMetavar(m.name.clone())));
            }
        }
        let mut all = vec![&self.conclusion];
        all.extend(self.premises.iter());
        for j in &all {
            for slot in j.slots() {
                check_metas(slot, &seen).map_err(err)?;
                check_splices(slot).map_err(err)?;
            }
        }
        let mut bound = BTreeSet::new();
        let mut concl_subst = BTreeSet::new();
        scan_judgment(&self.conclusion, &mut bound, &mut concl_subst);
        if !concl_subst.is_empty() {
            return Err(err(RuleErrorKind::SubstInConclusion));
        }
        for p in &self.premises {
            let mut here = BTreeSet::new();
            let mut in_subst = BTreeSet::new();
            scan_judgment(p, &mut here, &mut in_subst);
            if let Some(m) = in_subst.iter().find(|m| !bound.contains(*m)) {
                return Err(err(RuleErrorKind::UnboundInSubst(m.clone())));
            }
            for m in &here {
                let decl = self.metavar(m).expect("declared, checked above");
                if !bound.contains(m) && !decl.premise_bound {
                    return Err(err(RuleErrorKind::Unscoped(m.clone())));
                }
            }
            bound.extend(here);
        }
        for (i, c) in self.side_conditions.iter().enumerate() {
            for m in c.metavars() {
                if !seen.contains_key(m) {
                    return Err(err(RuleErrorKind::UnknownMetavar(m.to_string())));
                }
            }
            if let Some(m) = c.inputs().into_iter().find(|m| !bound.contains(*m)) {
                return Err(err(RuleErrorKind::SideConditionUnbound(i, m.to_string())));
            }
            if let SideCond::Arith { .. } = c {
                if let Some(m) = c.metavars().into_iter().find(|m| seen[m] != Sort::Num) {
                    return Err(err(RuleErrorKind::ArithSort(m.to_string())));
                }
            }
            if let SideCond::Lookup { result: Some(r), .. } = c {
                bound.insert(r.clone());
            }
        }
        Ok(())
    }
}

fn check_metas(t: &Term, decls: &HashMap<&str, Sort>) -> Result<(), RuleErrorKind> {
    if let Term::Meta(m) = t {
        match decls.get(m.name.as_str()) {
            None => return Err(RuleErrorKind::UnknownMetavar(m.name.clone())),
            Some(s) if *s != m.sort => return Err(RuleErrorKind::UnknownMetavar(m.name.clone())),
            Some(_) => {}
        }
    }
    t.children()
        .into_iter()
        .try_for_each(|c| check_metas(c, decls))
}

fn check_splices(t: &Term) -> Result<(), RuleErrorKind> {
    if let Term::Ctx(entries) = t {
        for (i, e) in entries.iter().enumerate() {
            if i > 0 && matches!(e, Term::Meta(m) if m.sort == Sort::Ctx) {
                return Err(RuleErrorKind::SpliceNotFirst);
            }
        }
    }
    t.children().into_iter().try_for_each(check_splices)
}

/// Collects metavariables in bindable positions and those under a `Subst`.
fn scan_judgment(j: &Judgment, bindable: &mut BTreeSet<String>, in_subst: &mut BTreeSet<String>) {
    for slot in j.slots() {
        scan(slot, false, bindable, in_subst);
    }
}

fn scan(t: &Term, under_subst: bool, bindable: &mut BTreeSet<String>, in_subst: &mut BTreeSet<String>) {
    match t {
        Term::Meta(m) if under_subst => {
            in_subst.insert(m.name.clone());
        }
        Term::Meta(m) => {
            bindable.insert(m.name.clone());
        }
        Term::Subst(..) => {
            for c in t.children() {
                scan(c, true, bindable, in_subst);
            }
        }
        _ => {
            for c in t.children() {
                scan(c, under_subst, bindable, in_subst);
            }
        }
    }
}

/// Metavariable names in first-occurrence order.
fn occurrence_order(t: &Term, out: &mut Vec<String>) {
    if let Term::Meta(m) = t {
        if !out.contains(&m.name) {
            out.push(m.name.clone());
        }
    }
    for c in t.children() {
        occurrence_order(c, out);
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("rule {rule}: {kind}")]
pub struct RuleError {
    pub rule: String,
    pub kind: RuleErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RuleErrorKind {
    #[error("cannot parse schema: {0}")]
    Parse(ParseError),
    #[error("metavariable {0} is declared twice")]
    DuplicateMetavar(String),
    #[error("metavariable {0} is not declared (or used at another sort)")]
    UnknownMetavar(String),
    #[error("metavariable {0} first occurs in a premise but is not marked premise-bound")]
    Unscoped(String),
    #[error("metavariable {0} is used in a substitution before it is bound")]
    UnboundInSubst(String),
    #[error("substitutions may not appear in the conclusion")]
    SubstInConclusion,
    #[error("side condition {0} uses {1} before it is bound")]
    SideConditionUnbound(usize, String),
    #[error("arithmetic side condition over non-numeral metavariable {0}")]
    ArithSort(String),
    #[error("a context splice may only be the first entry of a context")]
    SpliceNotFirst,
    #[error("duplicate rule name")]
    DuplicateRule,
}

/// Builder for one rule; schemas are parsed when the system is built.
#[derive(Clone, Debug)]
pub struct RuleBuilder {
    name: String,
    category: String,
    metas: Vec<(String, Sort)>,
    premise_bound: Vec<String>,
    premises: Vec<String>,
    conclusion: String,
    side_conditions: Vec<SideCond>,
    doc: String,
}

impl RuleBuilder {
    pub fn new(name: impl Into<String>, category: impl Into<String>) -> Self {
        RuleBuilder {
            name: name.into(),
            category: category.into(),
            metas: Vec::new(),
            premise_bound: Vec::new(),
            premises: Vec::new(),
            conclusion: String::new(),
            side_conditions: Vec::new(),
            doc: String::new(),
        }
    }

    pub fn meta(&mut self, name: &str, sort: Sort) -> &mut Self {
        self.metas.push((name.to_string(), sort));
        self
    }

    pub fn metas(&mut self, decls: &[(&str, Sort)]) -> &mut Self {
        for (n, s) in decls {
            self.meta(n, *s);
        }
        self
    }

    pub fn premise_bound(&mut self, names: &[&str]) -> &mut Self {
        self.premise_bound.extend(names.iter().map(|s| s.to_string()));
        self
    }

    pub fn premise(&mut self, schema: &str) -> &mut Self {
        self.premises.push(schema.to_string());
        self
    }

    pub fn conclusion(&mut self, schema: &str) -> &mut Self {
        self.conclusion = schema.to_string();
        self
    }

    pub fn side(&mut self, c: SideCond) -> &mut Self {
        self.side_conditions.push(c);
        self
    }

    pub fn doc(&mut self, text: &str) -> &mut Self {
        self.doc = text.to_string();
        self
    }

    pub fn build(&self, kind: JudgmentKind) -> Result<Rule, RuleError> {
        let err = |kind| RuleError {
            rule: self.name.clone(),
            kind,
        };
        let env = self.metas.iter().cloned().collect();
        let parse = |text: &str| parse_schema(text, kind, &env).map_err(|e| err(RuleErrorKind::Parse(e)));
        let conclusion = parse(&self.conclusion)?;
        let premises = self
            .premises
            .iter()
            .map(|p| parse(p))
            .collect::<Result<Vec<_>, _>>()?;

        let mut order = Vec::new();
        for j in std::iter::once(&conclusion).chain(premises.iter()) {
            for slot in j.slots() {
                occurrence_order(slot, &mut order);
            }
        }
        for c in &self.side_conditions {
            for m in c.metavars() {
                if !order.iter().any(|o| o == m) {
                    order.push(m.to_string());
                }
            }
        }
        for (name, _) in &self.metas {
            if !order.contains(name) {
                order.push(name.clone());
            }
        }
        let metavars = self
            .metas
            .iter()
            .map(|(name, sort)| MetavarDecl {
                name: name.clone(),
                sort: *sort,
                color: order.iter().position(|o| o == name).expect("every declared name is ordered"),
                premise_bound: self.premise_bound.contains(name),
            })
            .collect();
        let rule = Rule {
            name: self.name.clone(),
            category: self.category.clone(),
            metavars,
            premises,
            conclusion,
            side_conditions: self.side_conditions.clone(),
            doc: self.doc.clone(),
        };
        rule.audit()?;
        Ok(rule)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSystem {
    pub id: String,
    pub kind: JudgmentKind,
    pub categories: Vec<String>,
    pub rules: Vec<Rule>,
}

impl RuleSystem {
    pub fn builder(id: impl Into<String>, kind: JudgmentKind) -> RuleSystemBuilder {
        RuleSystemBuilder {
            id: id.into(),
            kind,
            rules: Vec::new(),
        }
    }

    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }

    pub fn audit(&self) -> Result<(), RuleError> {
        let mut names = BTreeSet::new();
        for r in &self.rules {
            if !names.insert(&r.name) {
                return Err(RuleError {
                    rule: r.name.clone(),
                    kind: RuleErrorKind::DuplicateRule,
                });
            }
            r.audit()?;
        }
        Ok(())
    }
}

pub struct RuleSystemBuilder {
    id: String,
    kind: JudgmentKind,
    rules: Vec<RuleBuilder>,
}

impl RuleSystemBuilder {
    pub fn rule(&mut self, name: &str, category: &str) -> &mut RuleBuilder {
        self.rules.push(RuleBuilder::new(name, category));
        self.rules.last_mut().expect("just pushed")
    }

    pub fn build(&self) -> Result<RuleSystem, RuleError> {
        let rules = self
            .rules
            .iter()
            .map(|r| r.build(self.kind))
            .collect::<Result<Vec<_>, _>>()?;
        let mut categories: Vec<String> = Vec::new();
        for r in &rules {
            if !categories.contains(&r.category) {
                categories.push(r.category.clone());
            }
        }
        let sys = RuleSystem {
            id: self.id.clone(),
            kind: self.kind,
            categories,
            rules,
        };
        sys.audit()?;
        Ok(sys)
    }
}
