use crate::term::{Judgment, Term};

/// A fragment of printed text; metavariable occurrences are kept apart so
/// documentation can color them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Piece {
    Text(String),
    Meta(String),
}

#[derive(Default)]
pub(crate) struct Out {
    pieces: Vec<Piece>,
}

impl Out {
    fn text(&mut self, s: &str) {
        if let Some(Piece::Text(last)) = self.pieces.last_mut() {
            last.push_str(s);
        } else {
            self.pieces.push(Piece::Text(s.to_string()));
        }
    }

    fn meta(&mut self, name: &str) {
        self.pieces.push(Piece::Meta(name.to_string()));
    }

    pub(crate) fn into_pieces(self) -> Vec<Piece> {
        self.pieces
    }

    pub(crate) fn into_string(self) -> String {
        self.pieces
            .into_iter()
            .map(|p| match p {
                Piece::Text(s) | Piece::Meta(s) => s,
            })
            .collect()
    }
}

// Expression levels: 0 = fun/let/if, 1 = +, 2 = application, 3 = atom.
fn expr_level(t: &Term) -> u8 {
    match t {
        Term::Fun(..) | Term::Let(..) | Term::If(..) => 0,
        Term::Plus(..) => 1,
        Term::App(..) => 2,
        _ => 3,
    }
}

// Proposition levels: 0 = =>, 1 = \/, 2 = /\, 3 = ~, 4 = atom.
fn prop_level(t: &Term) -> u8 {
    match t {
        Term::Implies(..) => 0,
        Term::Or(..) => 1,
        Term::And(..) => 2,
        Term::Not(_) => 3,
        _ => 4,
    }
}

fn is_type(t: &Term) -> bool {
    matches!(t, Term::TNum | Term::TBool | Term::TArrow(..))
}

fn is_prop(t: &Term) -> bool {
    matches!(
        t,
        Term::Atom(_) | Term::And(..) | Term::Or(..) | Term::Implies(..) | Term::Not(_) | Term::Falsum
    )
}

impl Out {
    /// Leaves that print the same in every sort.
    fn leaf(&mut self, t: &Term) -> bool {
        match t {
            Term::Hole => self.text("?"),
            Term::Abbrev(n) => self.text(&format!("${n}")),
            Term::Meta(m) => self.meta(&m.name),
            _ => return false,
        }
        true
    }

    fn parens(&mut self, wrap: bool, f: impl FnOnce(&mut Out)) {
        if wrap {
            self.text("(");
        }
        f(self);
        if wrap {
            self.text(")");
        }
    }

    pub(crate) fn term(&mut self, t: &Term) {
        if is_type(t) {
            self.ty(t, 0)
        } else if is_prop(t) {
            self.prop(t, 0)
        } else if matches!(t, Term::Ctx(_)) {
            self.ctx(t)
        } else if matches!(t, Term::Decl(..)) {
            self.entry(t)
        } else {
            self.expr(t, 0)
        }
    }

    pub(crate) fn expr(&mut self, t: &Term, prec: u8) {
        if self.leaf(t) {
            return;
        }
        let wrap = expr_level(t) < prec;
        self.parens(wrap, |o| match t {
            Term::Var(x) | Term::Atom(x) => o.text(x),
            Term::Num(n) => o.text(&n.to_string()),
            Term::Bool(b) => o.text(if *b { "true" } else { "false" }),
            Term::Plus(a, b) => {
                o.expr(a, 1);
                o.text(" + ");
                o.expr(b, 2);
            }
            Term::App(f, a) => {
                o.expr(f, 2);
                o.text(" ");
                o.expr(a, 3);
            }
            Term::Fun(x, ty, body) => {
                o.text("fun ");
                o.expr(x, 3);
                o.text(":");
                o.ty(ty, 1);
                o.text(" -> ");
                o.expr(body, 0);
            }
            Term::Let(x, e1, e2) => {
                o.text("let ");
                o.expr(x, 3);
                o.text(" = ");
                o.expr(e1, 0);
                o.text(" in ");
                o.expr(e2, 0);
            }
            Term::If(c, a, b) => {
                o.text("if ");
                o.expr(c, 0);
                o.text(" then ");
                o.expr(a, 0);
                o.text(" else ");
                o.expr(b, 0);
            }
            Term::Subst(e, x, v) => {
                o.text("[");
                o.expr(v, 0);
                o.text("/");
                o.expr(x, 3);
                o.text("]");
                o.expr(e, 3);
            }
            other if is_type(other) => o.ty(other, 0),
            other if is_prop(other) => o.prop(other, 0),
            other => o.term(other),
        });
    }

    pub(crate) fn ty(&mut self, t: &Term, prec: u8) {
        if self.leaf(t) {
            return;
        }
        match t {
            Term::TNum => self.text("Num"),
            Term::TBool => self.text("Bool"),
            Term::TArrow(a, b) => self.parens(prec > 0, |o| {
                o.ty(a, 1);
                o.text(" -> ");
                o.ty(b, 0);
            }),
            other => self.term(other),
        }
    }

    pub(crate) fn prop(&mut self, t: &Term, prec: u8) {
        if self.leaf(t) {
            return;
        }
        let wrap = prop_level(t) < prec;
        self.parens(wrap, |o| match t {
            Term::Atom(a) => o.text(a),
            Term::Falsum => o.text("_|_"),
            Term::Not(a) => {
                o.text("~");
                o.prop(a, 3);
            }
            Term::And(a, b) => {
                o.prop(a, 2);
                o.text(" /\\ ");
                o.prop(b, 3);
            }
            Term::Or(a, b) => {
                o.prop(a, 1);
                o.text(" \\/ ");
                o.prop(b, 2);
            }
            Term::Implies(a, b) => {
                o.prop(a, 1);
                o.text(" => ");
                o.prop(b, 0);
            }
            other => o.term(other),
        });
    }

    fn entry(&mut self, t: &Term) {
        match t {
            Term::Decl(x, ty) => {
                self.expr(x, 3);
                self.text(":");
                self.ty(ty, 0);
            }
            other => {
                if !self.leaf(other) {
                    self.prop(other, 0)
                }
            }
        }
    }

    pub(crate) fn ctx(&mut self, t: &Term) {
        match t {
            Term::Ctx(entries) => {
                self.text("[");
                for (i, e) in entries.iter().enumerate() {
                    if i > 0 {
                        self.text(", ");
                    }
                    self.entry(e);
                }
                self.text("]");
            }
            other => {
                if !self.leaf(other) {
                    self.term(other)
                }
            }
        }
    }

    pub(crate) fn judgment(&mut self, j: &Judgment) {
        match j {
            Judgment::Typing { ctx, expr, ty } => {
                self.ctx(ctx);
                self.text(" |- ");
                self.expr(expr, 0);
                self.text(" : ");
                self.ty(ty, 0);
            }
            Judgment::Eval { expr, value } => {
                self.expr(expr, 0);
                self.text(" evalto ");
                self.expr(value, 0);
            }
            Judgment::Entail { ctx, prop } => {
                self.ctx(ctx);
                self.text(" |- ");
                self.prop(prop, 0);
            }
            Judgment::Hole => self.text("?"),
        }
    }
}

/// Canonical printing with minimal parentheses.
pub fn print_term(t: &Term) -> String {
    let mut o = Out::default();
    o.term(t);
    o.into_string()
}

pub fn print_judgment(j: &Judgment) -> String {
    let mut o = Out::default();
    o.judgment(j);
    o.into_string()
}

pub fn judgment_pieces(j: &Judgment) -> Vec<Piece> {
    let mut o = Out::default();
    o.judgment(j);
    o.into_pieces()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_parentheses() {
        assert_eq!(print_term(&Term::plus(1.into(), 2.into())), "1 + 2");
        let t = Term::app(Term::fun("x", Term::TNum, Term::var("x")), 2.into());
        assert_eq!(print_term(&t), "(fun x:Num -> x) 2");
        let p = Term::implies(
            Term::atom("A"),
            Term::implies(Term::atom("B"), Term::atom("A")),
        );
        assert_eq!(print_term(&p), "A => B => A");
        let q = Term::implies(
            Term::implies(Term::atom("A"), Term::atom("B")),
            Term::atom("A"),
        );
        assert_eq!(print_term(&q), "(A => B) => A");
    }

    #[test]
    fn arrow_annotations_are_parenthesized() {
        let t = Term::fun("f", Term::arrow(Term::TNum, Term::TNum), Term::var("f"));
        assert_eq!(print_term(&t), "fun f:(Num -> Num) -> f");
    }

    #[test]
    fn right_nested_plus_keeps_parens() {
        let t = Term::plus(1.into(), Term::plus(2.into(), 3.into()));
        assert_eq!(print_term(&t), "1 + (2 + 3)");
    }

    #[test]
    fn judgments() {
        let j = Judgment::typing(
            Term::Ctx(vec![Term::decl("x", Term::TNum), Term::Hole]),
            Term::var("x"),
            Term::TNum,
        );
        assert_eq!(print_judgment(&j), "[x:Num, ?] |- x : Num");
        assert_eq!(print_judgment(&Judgment::Hole), "?");
    }
}
