//! Ground-truth evaluator.
//!
//! Every expression normalizes to a [`Structure`]: an insertion-ordered map from
//! role paths to symbols. Queries peel role atoms off the outside of each path,
//! keeping only the bindings that match.

use std::fmt;

use indexmap::IndexMap;

use crate::error::{EvalError, SyntaxError};
use crate::syntax::{parse_str, Expr, Role, RolePath, Symbol};

/// A set of symbol/role-path bindings.
///
/// Paths are pairwise suffix-free, so no tree position is both a leaf and an
/// internal node. Equality ignores insertion order but printing preserves it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Structure {
    bindings: IndexMap<RolePath, Symbol>,
}

impl Structure {
    pub fn new() -> Self {
        Self::default()
    }

    /// A bare symbol, bound to the empty path.
    pub fn symbol(sym: Symbol) -> Self {
        let mut bindings = IndexMap::new();
        bindings.insert(RolePath::empty(), sym);
        Structure { bindings }
    }

    /// Builds a structure from bindings, rejecting conflicts.
    pub fn from_bindings<I>(bindings: I) -> Result<Self, EvalError>
    where
        I: IntoIterator<Item = (RolePath, Symbol)>,
    {
        let mut s = Structure::new();
        for (path, sym) in bindings {
            s.insert(path, sym)?;
        }
        Ok(s)
    }

    /// Adds one binding, keeping paths suffix-free and unique.
    pub fn insert(&mut self, path: RolePath, sym: Symbol) -> Result<(), EvalError> {
        if let Some(existing) = self.conflict_with(&path) {
            return Err(EvalError::SumConflict { existing: existing.clone(), incoming: path });
        }
        self.bindings.insert(path, sym);
        Ok(())
    }

    /// First existing path that `path` duplicates or stands in a suffix relation with.
    pub fn conflict_with(&self, path: &RolePath) -> Option<&RolePath> {
        self.bindings
            .keys()
            .find(|p| *p == path || p.is_proper_suffix_of(path) || path.is_proper_suffix_of(p))
    }

    /// Ordered union: `self`'s bindings first, then `other`'s.
    pub fn union(&self, other: &Structure) -> Result<Structure, EvalError> {
        let mut out = self.clone();
        for (path, sym) in &other.bindings {
            out.insert(path.clone(), sym.clone())?;
        }
        Ok(out)
    }

    /// Appends `role` as the new outermost atom of every path.
    pub fn bind(&self, role: &Role) -> Structure {
        Structure {
            bindings: self.bindings.iter().map(|(p, s)| (p.bound(role), s.clone())).collect(),
        }
    }

    /// Keeps the bindings whose outermost atom is `role`, with that atom removed.
    pub fn unbind_one(&self, role: &Role) -> Value {
        let matched: IndexMap<RolePath, Symbol> = self
            .bindings
            .iter()
            .filter_map(|(p, s)| p.strip_outermost(role).map(|q| (q, s.clone())))
            .collect();
        if matched.is_empty() {
            Value::Miss
        } else {
            Value::Struct(Structure { bindings: matched })
        }
    }

    pub fn get(&self, path: &RolePath) -> Option<&Symbol> {
        self.bindings.get(path)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&RolePath, &Symbol)> {
        self.bindings.iter()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    /// Length of the longest path (0 for a bare symbol or an empty structure).
    pub fn depth(&self) -> usize {
        self.bindings.keys().map(RolePath::len).max().unwrap_or(0)
    }

    /// The bare symbol, if this structure is one.
    pub fn as_symbol(&self) -> Option<&Symbol> {
        match self.bindings.first() {
            Some((p, s)) if p.is_empty() => Some(s),
            _ => None,
        }
    }

    /// The same structure as a sum-of-bindings expression.
    pub fn to_expr(&self) -> Option<Expr> {
        Expr::sum_all(self.bindings.iter().map(|(p, s)| Expr::binding(s.as_str(), p)))
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (path, sym)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            f.write_str(sym.as_str())?;
            for atom in path.atoms() {
                write!(f, ":{atom}")?;
            }
        }
        Ok(())
    }
}

/// Result of evaluation: a structure, or `$` when a query found nothing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Miss,
    Struct(Structure),
}

impl Value {
    pub fn as_structure(&self) -> Option<&Structure> {
        match self {
            Value::Struct(s) => Some(s),
            Value::Miss => None,
        }
    }

    pub fn is_miss(&self) -> bool {
        matches!(self, Value::Miss)
    }

    /// Peels the atoms of `path` outermost first; `$` is absorbing.
    pub fn query(self, path: &RolePath) -> Value {
        path.atoms().iter().rev().fold(self, |v, role| match v {
            Value::Struct(s) => s.unbind_one(role),
            Value::Miss => Value::Miss,
        })
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Miss => f.write_str("$"),
            Value::Struct(s) => s.fmt(f),
        }
    }
}

pub fn eval(e: &Expr) -> Result<Value, EvalError> {
    match e {
        Expr::Sym(s) => Ok(Value::Struct(Structure::symbol(s.clone()))),
        Expr::Bind { child, role } => match eval(child)? {
            Value::Miss => Ok(Value::Miss),
            Value::Struct(s) => Ok(Value::Struct(s.bind(role))),
        },
        Expr::Sum { left, right } => {
            let (Value::Struct(l), Value::Struct(r)) = (eval(left)?, eval(right)?) else {
                return Err(EvalError::MissOperand("sum"));
            };
            Ok(Value::Struct(l.union(&r)?))
        }
        Expr::Query { subject, path } => Ok(eval(subject)?.query(path)),
    }
}

pub fn unbind_one(s: &Structure, role: &Role) -> Value {
    s.unbind_one(role)
}

pub fn print_value(v: &Value) -> String {
    v.to_string()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalStrError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Parses and evaluates `text` with the default alphabet.
pub fn eval_str(text: &str) -> Result<Value, EvalStrError> {
    Ok(eval(&parse_str(text)?)?)
}
