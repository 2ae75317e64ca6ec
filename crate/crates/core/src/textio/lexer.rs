use std::fmt;

use num_bigint::BigInt;
use serde::Serialize;

/// Source position, 1-based line and column (in characters).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

/// Half-open source range `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SrcSpan {
    pub start: Pos,
    pub end: Pos,
}

impl SrcSpan {
    pub fn point(p: Pos) -> SrcSpan {
        SrcSpan { start: p, end: p }
    }

    pub fn line(line: usize, from_col: usize, to_col: usize) -> SrcSpan {
        SrcSpan {
            start: Pos { line, col: from_col },
            end: Pos { line, col: to_col },
        }
    }
}

impl fmt::Display for SrcSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start.line, self.start.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(BigInt),
    Abbrev(String),
    Sym(&'static str),
    Eof,
}

impl Tok {
    pub(crate) fn text(&self) -> String {
        match self {
            Tok::Ident(s) => s.clone(),
            Tok::Int(n) => n.to_string(),
            Tok::Abbrev(s) => format!("${s}"),
            Tok::Sym(s) => (*s).to_string(),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SrcSpan,
}

const SYMBOLS: &[&str] = &[
    "|-", "->", "=>", "/\\", "\\/", "_|_", "+", "(", ")", "[", "]", ",", ":", "?", "=", "~", "/",
];

pub(crate) const KEYWORDS: &[&str] = &[
    "fun", "let", "in", "if", "then", "else", "true", "false", "Num", "Bool", "evalto", "by",
    "use",
];

pub(crate) fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

fn ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

/// Error produced when no token can start at a position.
pub(crate) struct LexError {
    pub span: SrcSpan,
    pub found: String,
}

/// Tokenizes `text`, numbering positions from `base`.
pub(crate) fn lex(text: &str, base: Pos) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = base.line;
    let mut col = base.col;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start = Pos { line, col };
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        if let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            let n = sym.chars().count();
            out.push(Token {
                tok: Tok::Sym(sym),
                span: SrcSpan::line(line, col, col + n),
            });
            i += n;
            col += n;
            continue;
        }
        // `-` directly followed by a digit starts a negative literal
        let negative = c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit());
        if c.is_ascii_digit() || negative {
            let mut j = i + 1;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let s: String = chars[i..j].iter().collect();
            let n: BigInt = s.parse().expect("digits parse as an integer");
            out.push(Token {
                tok: Tok::Int(n),
                span: SrcSpan::line(line, col, col + (j - i)),
            });
            col += j - i;
            i = j;
            continue;
        }
        if ident_start(c) || (c == '$' && chars.get(i + 1).is_some_and(|d| ident_start(*d))) {
            let from = if c == '$' { i + 1 } else { i };
            let mut j = from + 1;
            while j < chars.len() && ident_continue(chars[j]) {
                j += 1;
            }
            let s: String = chars[from..j].iter().collect();
            let tok = if c == '$' { Tok::Abbrev(s) } else { Tok::Ident(s) };
            out.push(Token {
                tok,
                span: SrcSpan::line(line, col, col + (j - i)),
            });
            col += j - i;
            i = j;
            continue;
        }
        return Err(LexError {
            span: SrcSpan {
                start,
                end: Pos { line, col: col + 1 },
            },
            found: c.to_string(),
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        span: SrcSpan::point(Pos { line, col }),
    });
    Ok(out)
}
