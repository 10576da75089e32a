//! Lexer, LALR(1) parser, syntax tree, canonical printer and concept
//! summaries for the entity-modeling DSL.

pub mod ast;
pub mod diagnostic;
pub mod grammar;
pub mod lalr;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod summary;

pub use ast::*;
pub use diagnostic::{Diagnostic, DiagnosticCode, Severity, SourceSpan};
pub use grammar::GRAMMAR_EBNF;
pub use lexer::{tokenize, Token, TokenKind, KEYWORDS};
pub use parser::{parse, parse_named};
pub use printer::print;
pub use summary::{concept_summary, ConceptSummary, ModelSummary};
