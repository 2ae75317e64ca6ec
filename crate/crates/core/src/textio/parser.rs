use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use super::lexer::{is_keyword, lex, Pos, SrcSpan, Tok, Token};
use crate::term::{Judgment, JudgmentKind, Metavar, Sort, Term};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, thiserror::Error)]
pub struct ParseError {
    pub span: SrcSpan,
    /// Never empty.
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: expected ", self.span)?;
        match self.expected.as_slice() {
            [one] => write!(f, "{one}")?,
            [init @ .., last] => write!(f, "{} or {last}", init.join(", "))?,
            [] => write!(f, "something else")?,
        }
        write!(f, ", found `{}`", self.found)
    }
}

type PResult<T> = Result<T, ParseError>;

/// Metavariable environment used when parsing rule schemas.
pub(crate) type MetaEnv = HashMap<String, Sort>;

pub(crate) struct Parser<'m> {
    toks: Vec<Token>,
    pos: usize,
    metas: Option<&'m MetaEnv>,
}

fn exp(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

const EXPR_START: &[&str] = &[
    "identifier", "integer", "true", "false", "fun", "let", "if", "(", "?", "$name",
];
const TYPE_START: &[&str] = &["Num", "Bool", "(", "?", "$name"];
const PROP_START: &[&str] = &["identifier", "_|_", "~", "(", "?", "$name"];

impl<'m> Parser<'m> {
    pub(crate) fn new(text: &str, base: Pos, metas: Option<&'m MetaEnv>) -> PResult<Self> {
        let toks = lex(text, base).map_err(|e| ParseError {
            span: e.span,
            expected: exp(&["a token"]),
            found: e.found,
        })?;
        Ok(Parser { toks, pos: 0, metas })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: Vec<String>) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError {
            span: t.span,
            expected,
            found: t.tok.text(),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> PResult<()> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(vec![s.to_string()]))
        }
    }

    fn eat_kw(&mut self, s: &str) -> PResult<()> {
        if self.is_kw(s) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(vec![s.to_string()]))
        }
    }

    pub(crate) fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub(crate) fn expect_eof(&self) -> PResult<()> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.error(exp(&["end of input"])))
        }
    }

    fn meta_of(&self, name: &str) -> Option<Sort> {
        self.metas.and_then(|m| m.get(name).copied())
    }

    fn meta_term(&self, name: &str, sort: Sort) -> Term {
        Term::Meta(Metavar {
            name: name.to_string(),
            sort,
        })
    }

    fn plain_ident(&self) -> Option<String> {
        match self.peek() {
            Tok::Ident(s) if !is_keyword(s) => Some(s.clone()),
            _ => None,
        }
    }

    pub(crate) fn binder(&mut self) -> PResult<Term> {
        let Some(name) = self.plain_ident() else {
            return Err(self.error(exp(&["variable name"])));
        };
        self.bump();
        Ok(match self.meta_of(&name) {
            Some(Sort::Name) => self.meta_term(&name, Sort::Name),
            _ => Term::Var(name),
        })
    }

    pub(crate) fn expr(&mut self) -> PResult<Term> {
        if self.is_kw("fun") {
            self.bump();
            let x = self.binder()?;
            self.eat_sym(":")?;
            let ty = self.ty_atom()?;
            self.eat_sym("->")?;
            let body = self.expr()?;
            return Ok(Term::Fun(Box::new(x), Box::new(ty), Box::new(body)));
        }
        if self.is_kw("let") {
            self.bump();
            let x = self.binder()?;
            self.eat_sym("=")?;
            let bound = self.expr()?;
            self.eat_kw("in")?;
            let body = self.expr()?;
            return Ok(Term::Let(Box::new(x), Box::new(bound), Box::new(body)));
        }
        if self.is_kw("if") {
            self.bump();
            let c = self.expr()?;
            self.eat_kw("then")?;
            let t = self.expr()?;
            self.eat_kw("else")?;
            let e = self.expr()?;
            return Ok(Term::if_(c, t, e));
        }
        let mut lhs = self.app()?;
        while self.is_sym("+") {
            self.bump();
            let rhs = self.app()?;
            lhs = Term::plus(lhs, rhs);
        }
        Ok(lhs)
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => !is_keyword(s) || s == "true" || s == "false",
            Tok::Int(_) | Tok::Abbrev(_) => true,
            Tok::Sym(s) => matches!(*s, "(" | "?") || (*s == "[" && self.metas.is_some()),
            Tok::Eof => false,
        }
    }

    fn app(&mut self) -> PResult<Term> {
        let mut f = self.atom()?;
        while self.starts_atom() {
            let a = self.atom()?;
            f = Term::app(f, a);
        }
        Ok(f)
    }

    fn atom(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(Term::Bool(s == "true"))
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(match self.meta_of(&s) {
                    Some(sort @ (Sort::Expr | Sort::Value | Sort::Num | Sort::Name)) => {
                        self.meta_term(&s, sort)
                    }
                    _ => Term::Var(s),
                })
            }
            Tok::Int(n) => {
                self.bump();
                Ok(Term::Num(n))
            }
            Tok::Abbrev(n) => {
                self.bump();
                Ok(Term::Abbrev(n))
            }
            Tok::Sym("?") => {
                self.bump();
                Ok(Term::Hole)
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.eat_sym(")")?;
                Ok(e)
            }
            Tok::Sym("[") if self.metas.is_some() => {
                self.bump();
                let v = self.expr()?;
                self.eat_sym("/")?;
                let x = self.binder()?;
                self.eat_sym("]")?;
                let body = self.atom()?;
                Ok(Term::subst(body, x, v))
            }
            _ => Err(self.error(exp(EXPR_START))),
        }
    }

    pub(crate) fn ty(&mut self) -> PResult<Term> {
        let a = self.ty_atom()?;
        if self.is_sym("->") {
            self.bump();
            let b = self.ty()?;
            return Ok(Term::arrow(a, b));
        }
        Ok(a)
    }

    fn ty_atom(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "Num" => {
                self.bump();
                Ok(Term::TNum)
            }
            Tok::Ident(s) if s == "Bool" => {
                self.bump();
                Ok(Term::TBool)
            }
            Tok::Ident(s) if self.meta_of(&s) == Some(Sort::Type) => {
                self.bump();
                Ok(self.meta_term(&s, Sort::Type))
            }
            Tok::Abbrev(n) => {
                self.bump();
                Ok(Term::Abbrev(n))
            }
            Tok::Sym("?") => {
                self.bump();
                Ok(Term::Hole)
            }
            Tok::Sym("(") => {
                self.bump();
                let t = self.ty()?;
                self.eat_sym(")")?;
                Ok(t)
            }
            _ => Err(self.error(exp(TYPE_START))),
        }
    }

    pub(crate) fn prop(&mut self) -> PResult<Term> {
        let a = self.prop_or()?;
        if self.is_sym("=>") {
            self.bump();
            let b = self.prop()?;
            return Ok(Term::implies(a, b));
        }
        Ok(a)
    }

    fn prop_or(&mut self) -> PResult<Term> {
        let mut a = self.prop_and()?;
        while self.is_sym("\\/") {
            self.bump();
            let b = self.prop_and()?;
            a = Term::or(a, b);
        }
        Ok(a)
    }

    fn prop_and(&mut self) -> PResult<Term> {
        let mut a = self.prop_not()?;
        while self.is_sym("/\\") {
            self.bump();
            let b = self.prop_not()?;
            a = Term::and(a, b);
        }
        Ok(a)
    }

    fn prop_not(&mut self) -> PResult<Term> {
        if self.is_sym("~") {
            self.bump();
            let a = self.prop_not()?;
            return Ok(Term::not(a));
        }
        self.prop_atom()
    }

    fn prop_atom(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(match self.meta_of(&s) {
                    Some(Sort::Prop) => self.meta_term(&s, Sort::Prop),
                    _ => Term::Atom(s),
                })
            }
            Tok::Sym("_|_") => {
                self.bump();
                Ok(Term::Falsum)
            }
            Tok::Abbrev(n) => {
                self.bump();
                Ok(Term::Abbrev(n))
            }
            Tok::Sym("?") => {
                self.bump();
                Ok(Term::Hole)
            }
            Tok::Sym("(") => {
                self.bump();
                let p = self.prop()?;
                self.eat_sym(")")?;
                Ok(p)
            }
            _ => Err(self.error(exp(PROP_START))),
        }
    }

    pub(crate) fn ctx(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Abbrev(n) => {
                self.bump();
                Ok(Term::Abbrev(n))
            }
            Tok::Sym("?") => {
                self.bump();
                Ok(Term::Hole)
            }
            Tok::Ident(s) if self.meta_of(&s) == Some(Sort::Ctx) => {
                self.bump();
                Ok(self.meta_term(&s, Sort::Ctx))
            }
            Tok::Sym("[") => {
                self.bump();
                let mut entries = Vec::new();
                if self.is_sym("]") {
                    self.bump();
                    return Ok(Term::Ctx(entries));
                }
                loop {
                    entries.push(self.entry()?);
                    if self.is_sym(",") {
                        self.bump();
                        continue;
                    }
                    if self.is_sym("]") {
                        self.bump();
                        return Ok(Term::Ctx(entries));
                    }
                    return Err(self.error(exp(&[",", "]"])));
                }
            }
            _ => Err(self.error(exp(&["[", "?", "$name"]))),
        }
    }

    pub(crate) fn entry(&mut self) -> PResult<Term> {
        if let Some(name) = self.plain_ident() {
            if matches!(self.peek_at(1), Tok::Sym(":")) {
                let x = self.binder()?;
                self.bump();
                let ty = self.ty()?;
                return Ok(Term::Decl(Box::new(x), Box::new(ty)));
            }
            if self.meta_of(&name) == Some(Sort::Ctx) {
                self.bump();
                return Ok(self.meta_term(&name, Sort::Ctx));
            }
        }
        self.prop()
    }

    pub(crate) fn term_of_sort(&mut self, sort: Sort) -> PResult<Term> {
        match sort {
            Sort::Expr | Sort::Value | Sort::Num => self.expr(),
            Sort::Type => self.ty(),
            Sort::Prop => self.prop(),
            Sort::Ctx => self.ctx(),
            Sort::Name => self.binder(),
            Sort::Entry => self.entry(),
        }
    }

    fn has_token(&self, pred: impl Fn(&Tok) -> bool) -> bool {
        self.toks[self.pos..].iter().any(|t| pred(&t.tok))
    }

    pub(crate) fn judgment(&mut self, kind: Option<JudgmentKind>) -> PResult<Judgment> {
        if self.is_sym("?") && matches!(self.peek_at(1), Tok::Eof) {
            self.bump();
            return Ok(Judgment::Hole);
        }
        let kind = match kind {
            Some(k) => k,
            None if self.has_token(|t| matches!(t, Tok::Ident(s) if s == "evalto")) => {
                JudgmentKind::Eval
            }
            None if self.has_token(|t| matches!(t, Tok::Sym("|-"))) => {
                let ctx = self.ctx()?;
                self.eat_sym("|-")?;
                let save = self.pos;
                let typing = self.typing_rest(ctx.clone());
                return match typing {
                    Ok(j) => Ok(j),
                    Err(e1) => {
                        let e1_pos = self.pos;
                        self.pos = save;
                        match self.prop().and_then(|p| self.expect_eof().map(|_| p)) {
                            Ok(prop) => Ok(Judgment::Entail { ctx, prop }),
                            Err(e2) if self.pos > e1_pos => Err(e2),
                            Err(_) => Err(e1),
                        }
                    }
                };
            }
            None => return Err(self.error(exp(&["?", "|-", "evalto"]))),
        };
        let j = match kind {
            JudgmentKind::Typing => {
                let ctx = self.ctx()?;
                self.eat_sym("|-")?;
                return self.typing_rest(ctx);
            }
            JudgmentKind::Eval => {
                let expr = self.expr()?;
                self.eat_kw("evalto")?;
                let value = self.expr()?;
                Judgment::Eval { expr, value }
            }
            JudgmentKind::Entail => {
                let ctx = self.ctx()?;
                self.eat_sym("|-")?;
                let prop = self.prop()?;
                Judgment::Entail { ctx, prop }
            }
        };
        self.expect_eof()?;
        Ok(j)
    }

    fn typing_rest(&mut self, ctx: Term) -> PResult<Judgment> {
        let expr = self.expr()?;
        self.eat_sym(":")?;
        let ty = self.ty()?;
        self.expect_eof()?;
        Ok(Judgment::Typing { ctx, expr, ty })
    }
}

const ORIGIN: Pos = Pos { line: 1, col: 1 };

/// Parses a term of the given sort (`?` is a hole, `$name` an abbreviation).
pub fn parse_term(sort: Sort, text: &str) -> Result<Term, ParseError> {
    parse_term_at(sort, text, ORIGIN)
}

pub(crate) fn parse_term_at(sort: Sort, text: &str, base: Pos) -> Result<Term, ParseError> {
    let mut p = Parser::new(text, base, None)?;
    let t = p.term_of_sort(sort)?;
    p.expect_eof()?;
    Ok(t)
}

/// Parses a judgment; with `kind = None` the kind is inferred from the text.
pub fn parse_judgment(text: &str, kind: Option<JudgmentKind>) -> Result<Judgment, ParseError> {
    parse_judgment_at(text, kind, ORIGIN)
}

pub(crate) fn parse_judgment_at(
    text: &str,
    kind: Option<JudgmentKind>,
    base: Pos,
) -> Result<Judgment, ParseError> {
    Parser::new(text, base, None)?.judgment(kind)
}

/// Parses a rule schema judgment in which the names in `metas` denote
/// metavariables.
pub(crate) fn parse_schema(
    text: &str,
    kind: JudgmentKind,
    metas: &MetaEnv,
) -> Result<Judgment, ParseError> {
    Parser::new(text, ORIGIN, Some(metas))?.judgment(Some(kind))
}
