//! Surface syntax: terms, judgments, `.deriv` documents, reports and
//! text-level edit commands.

mod docfmt;
mod lexer;
mod parser;
mod printer;
mod report;
mod wire;

pub use docfmt::{parse_document, parse_document_with_spans, print_document, DocParseError, SpanMap};
pub use lexer::{Pos, SrcSpan};
pub use parser::{parse_judgment, parse_term, ParseError};
pub use printer::{judgment_pieces, print_judgment, print_term, Piece};
pub use report::{human_parse_error, human_report, json_parse_error, json_report, status_line};
pub use wire::{WireEdit, WireError};

pub(crate) use parser::parse_schema;
#[cfg(test)]
pub(crate) use parser::MetaEnv;

/// Whether `name` can be used as a variable, abbreviation or subtree name.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    chars
        .next()
        .is_some_and(|c| c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
        && !lexer::is_keyword(name)
}
