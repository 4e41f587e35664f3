use std::fmt;

use serde::{Deserialize, Serialize};

/// A filler symbol such as `qf`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Symbol(pub String);

/// A single structural role atom such as `L`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Role(pub String);

impl Symbol {
    pub fn new(s: impl Into<String>) -> Self {
        Symbol(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Role {
    pub fn new(s: impl Into<String>) -> Self {
        Role(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A sequence of role atoms stored innermost first.
///
/// `b:L:R` binds `b` to the path `[L, R]`: `L` is adjacent to the symbol and
/// `R` is the outermost atom, nearest the root. The empty path is the position
/// of a bare symbol.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RolePath(pub Vec<Role>);

impl RolePath {
    pub fn empty() -> Self {
        RolePath(Vec::new())
    }

    /// Builds a path from atom names given innermost first.
    pub fn from_atoms<I, S>(atoms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        RolePath(atoms.into_iter().map(|a| Role(a.into())).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn atoms(&self) -> &[Role] {
        &self.0
    }

    pub fn outermost(&self) -> Option<&Role> {
        self.0.last()
    }

    /// Returns a copy with `role` appended as the new outermost atom.
    pub fn bound(&self, role: &Role) -> Self {
        let mut atoms = self.0.clone();
        atoms.push(role.clone());
        RolePath(atoms)
    }

    /// Returns the path without its outermost atom, if that atom is `role`.
    pub fn strip_outermost(&self, role: &Role) -> Option<Self> {
        match self.0.split_last() {
            Some((last, rest)) if last == role => Some(RolePath(rest.to_vec())),
            _ => None,
        }
    }

    /// Proper-suffix test in stored order: `[R]` is a suffix of `[L, R]`.
    pub fn is_proper_suffix_of(&self, other: &RolePath) -> bool {
        self.len() < other.len() && other.0.ends_with(&self.0)
    }
}

impl fmt::Display for RolePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, atom) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(":")?;
            }
            f.write_str(atom.as_str())?;
        }
        Ok(())
    }
}

/// Abstract syntax of an expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Expr {
    Sym(Symbol),
    Bind { child: Box<Expr>, role: Role },
    Sum { left: Box<Expr>, right: Box<Expr> },
    /// `subject ? path`; the path is non-empty and peeled outermost first.
    Query { subject: Box<Expr>, path: RolePath },
}

impl Expr {
    pub fn sym(s: impl Into<String>) -> Self {
        Expr::Sym(Symbol(s.into()))
    }

    pub fn bind(child: Expr, role: impl Into<String>) -> Self {
        Expr::Bind { child: Box::new(child), role: Role(role.into()) }
    }

    pub fn sum(left: Expr, right: Expr) -> Self {
        Expr::Sum { left: Box::new(left), right: Box::new(right) }
    }

    /// Panics if `path` is empty.
    pub fn query(subject: Expr, path: RolePath) -> Self {
        assert!(!path.is_empty(), "query path must be non-empty");
        Expr::Query { subject: Box::new(subject), path }
    }

    /// `sym` bound to each atom of `path` in turn (innermost first).
    pub fn binding(sym: impl Into<String>, path: &RolePath) -> Self {
        path.atoms()
            .iter()
            .fold(Expr::sym(sym), |e, r| Expr::bind(e, r.as_str()))
    }

    /// Left-nested sum of the given terms; `None` if there are none.
    pub fn sum_all<I: IntoIterator<Item = Expr>>(terms: I) -> Option<Expr> {
        terms.into_iter().reduce(Expr::sum)
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Sym(_) => 1,
            Expr::Bind { child, .. } => 1 + child.size(),
            Expr::Sum { left, right } => 1 + left.size() + right.size(),
            Expr::Query { subject, .. } => 1 + subject.size(),
        }
    }
}
