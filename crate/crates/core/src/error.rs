use thiserror::Error;

use crate::syntax::{Role, RolePath, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unexpected character at offset {position}: {fragment:?}")]
pub struct LexError {
    pub position: usize,
    pub fragment: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at offset {position}: expected {}, found {found}", .expected.join(" or "))]
pub struct ParseError {
    pub position: usize,
    pub expected: Vec<&'static str>,
    pub found: String,
}

/// Either stage of turning text into an [`Expr`](crate::syntax::Expr).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("conflicting bindings in sum: {existing} vs {incoming}")]
    SumConflict { existing: RolePath, incoming: RolePath },
    #[error("operand of a {0} evaluated to `$`")]
    MissOperand(&'static str),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("generator gave up after {0} consecutive rejected samples")]
    GenExhausted(usize),
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TprError {
    #[error("dimension {dim} too small for {count} {what}")]
    DimTooSmall { what: &'static str, dim: usize, count: usize },
    #[error("no well-conditioned role matrix after {0} draws")]
    IllConditioned(usize),
    #[error("unknown symbol {0}")]
    UnknownSymbol(Symbol),
    #[error("unknown role {0}")]
    UnknownRole(Role),
    #[error("symbol vectors are not linearly independent; cannot decode")]
    DependentSymbols,
    #[error("ambiguous decode at path {0:?}")]
    AmbiguousDecode(RolePath),
    #[error("component at path {0:?} does not match any symbol")]
    Undecodable(RolePath),
    #[error("representation has depth {depth}, beyond the decode limit {max_depth}")]
    TooDeep { depth: usize, max_depth: usize },
    #[error("decoded bindings conflict: {0}")]
    Conflict(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HrrError {
    #[error("vector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("unknown symbol {0}")]
    UnknownSymbol(Symbol),
    #[error("unknown role {0}")]
    UnknownRole(Role),
    #[error("invalid HRR dimension {0}")]
    BadDimension(usize),
}

#[derive(Debug, Error)]
pub enum SuperpositionError {
    #[error("vocabulary too small: need {need} distinct symbols and roles, have {symbols}/{roles}")]
    VocabTooSmall { need: usize, symbols: usize, roles: usize },
    #[error("no vector for expression {0:?}")]
    MissingVector(String),
    #[error("vector for {expr:?} has length {got}, expected {expected}")]
    DimensionMismatch { expr: String, got: usize, expected: usize },
    #[error("empty norm sample")]
    EmptySample,
    #[error("expression {0:?} is not a two-binding sum")]
    NotTwoBindings(String),
    #[error("non-finite norm")]
    NonFinite,
    #[error("expression {expr:?}: {source}")]
    Expr { expr: String, source: Box<Error> },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Crate-level error used by the I/O entry points.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Tpr(#[from] TprError),
    #[error(transparent)]
    Hrr(#[from] HrrError),
    #[error(transparent)]
    Superposition(#[from] SuperpositionError),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the filesystem or output streams rather than of the
    /// input data.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) | Error::Csv(_) => true,
            Error::Superposition(SuperpositionError::Io(_) | SuperpositionError::Csv(_)) => true,
            Error::Superposition(SuperpositionError::Expr { source, .. }) => source.is_io(),
            _ => false,
        }
    }
}

impl From<LexError> for Error {
    fn from(e: LexError) -> Self {
        Error::Syntax(e.into())
    }
}

impl From<ParseError> for Error {
    fn from(e: ParseError) -> Self {
        Error::Syntax(e.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
