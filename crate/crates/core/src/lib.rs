//! Formal language of symbol-structure expressions and role-unbinding queries,
//! together with reference vector embeddings of the structures it denotes.
//!
//! - [`syntax`]: tokenizer, grammar, parser and printer.
//! - [`eval`]: the deterministic evaluator used as ground truth.
//! - [`datagen`]: seeded generation of expression/value datasets.
//! - [`tpr`]: tensor product representations with exact unbinding.
//! - [`hrr`]: holographic reduced representations (circular convolution).
//! - [`superposition`]: difference-vector norm batteries and their AUC.

pub mod datagen;
pub mod error;
pub mod eval;
pub mod hrr;
pub mod superposition;
pub mod syntax;
pub mod tpr;
pub mod vectors;

pub use error::{Error, Result};
pub use eval::{eval, eval_str, print_value, Structure, Value};
pub use syntax::{parse, parse_str, print_expr, tokenize, Expr, Role, RolePath, Symbol};
