//! Lexical and grammatical layer: tokens, syntax tree, parser and printer.

mod ast;
mod parser;
mod printer;
mod token;

pub use ast::{Expr, Role, RolePath, Symbol};
pub use parser::{parse, parse_str, parse_str_with};
pub use printer::print_expr;
pub use token::{tokenize, tokenize_with, Alphabet, Token, TokenKind, DEFAULT_ROLE_PATTERN, DEFAULT_SYMBOL_PATTERN};
