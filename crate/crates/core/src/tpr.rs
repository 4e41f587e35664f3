//! Tensor product representations.
//!
//! A structure is embedded as a family of tensors indexed by path depth: the
//! binding of symbol `s` to path `[r1, .., rd]` contributes
//! `s ⊗ r1 ⊗ .. ⊗ rd` to the depth-`d` component, whose shape is `σ × ρ^d`.
//! Components are stored row-major with the symbol axis first and the role
//! axes innermost first, so the outermost role is the last (fastest) axis.
//! Unbinding contracts that last axis with the role's unbinding vector, which
//! is a column of the pseudo-inverse of the role matrix.

use std::collections::BTreeMap;

use indexmap::IndexMap;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::TprError;
use crate::eval::{Structure, Value};
use crate::syntax::{Role, RolePath, Symbol};

/// Largest acceptable condition number of a gaussian role matrix.
pub const MAX_CONDITION: f64 = 1e6;
/// Gaussian role matrices drawn before giving up.
pub const MAX_DRAWS: usize = 100;
pub const DEFAULT_MISS_TOL: f64 = 1e-6;
const BIORTHOGONALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    OneHot,
    Gaussian,
    Orthogonal,
}

/// Symbol and role embeddings plus the role unbinding basis.
#[derive(Debug, Clone)]
pub struct Codebook {
    symbol_dim: usize,
    role_dim: usize,
    scheme: Scheme,
    seed: u64,
    condition_number: f64,
    symbols: IndexMap<Symbol, Vec<f64>>,
    roles: IndexMap<Role, Vec<f64>>,
    unbind: IndexMap<Role, Vec<f64>>,
    /// Pseudo-inverse of the `σ × |symbols|` symbol matrix, when the symbols
    /// are linearly independent.
    symbol_pinv: Option<DMatrix<f64>>,
}

pub fn make_codebook(
    symbols: &[Symbol],
    roles: &[Role],
    symbol_dim: usize,
    role_dim: usize,
    scheme: Scheme,
    seed: u64,
) -> Result<Codebook, TprError> {
    if role_dim < roles.len() {
        return Err(TprError::DimTooSmall { what: "roles", dim: role_dim, count: roles.len() });
    }
    if scheme != Scheme::Gaussian && symbol_dim < symbols.len() {
        return Err(TprError::DimTooSmall { what: "symbols", dim: symbol_dim, count: symbols.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let symbol_rows = match scheme {
        Scheme::OneHot => one_hot_rows(symbols.len(), symbol_dim),
        Scheme::Gaussian => gaussian_rows(&mut rng, symbols.len(), symbol_dim),
        Scheme::Orthogonal => orthonormal_rows(&mut rng, symbols.len(), symbol_dim),
    };
    let mut draws = 0;
    let (role_rows, unbind_rows, condition_number) = loop {
        draws += 1;
        let rows = match scheme {
            Scheme::OneHot => one_hot_rows(roles.len(), role_dim),
            Scheme::Gaussian => gaussian_rows(&mut rng, roles.len(), role_dim),
            Scheme::Orthogonal => orthonormal_rows(&mut rng, roles.len(), role_dim),
        };
        match unbinding_basis(&rows, role_dim) {
            Some((u, cond)) if cond < MAX_CONDITION => break (rows, u, cond),
            _ if scheme == Scheme::Gaussian && draws < MAX_DRAWS => continue,
            _ => return Err(TprError::IllConditioned(draws)),
        }
    };
    Ok(Codebook::assemble(
        symbol_dim,
        role_dim,
        scheme,
        seed,
        condition_number,
        symbols.iter().cloned().zip(symbol_rows).collect(),
        roles.iter().cloned().zip(role_rows.iter().cloned()).collect(),
        roles.iter().cloned().zip(unbind_rows).collect(),
    ))
}

fn one_hot_rows(count: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|k| {
            let mut v = vec![0.0; dim];
            v[k] = 1.0;
            v
        })
        .collect()
}

fn gaussian_rows(rng: &mut ChaCha8Rng, count: usize, dim: usize) -> Vec<Vec<f64>> {
    let normal = Normal::new(0.0, 1.0 / (dim as f64).sqrt()).unwrap();
    (0..count).map(|_| (0..dim).map(|_| normal.sample(rng)).collect()).collect()
}

fn orthonormal_rows(rng: &mut ChaCha8Rng, count: usize, dim: usize) -> Vec<Vec<f64>> {
    if count == 0 {
        return Vec::new();
    }
    let normal = Normal::new(0.0, 1.0).unwrap();
    let m = DMatrix::from_fn(dim, dim, |_, _| normal.sample(rng));
    let q = m.qr().q();
    (0..count).map(|k| q.column(k).iter().copied().collect()).collect()
}

fn matrix_of_rows(rows: &[Vec<f64>], dim: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j])
}

/// Unbinding vectors (columns of the pseudo-inverse) and the condition number
/// of the row matrix. `None` when the rows are rank deficient or the
/// biorthogonality check fails.
fn unbinding_basis(rows: &[Vec<f64>], dim: usize) -> Option<(Vec<Vec<f64>>, f64)> {
    if rows.is_empty() {
        return Some((Vec::new(), 1.0));
    }
    let r = matrix_of_rows(rows, dim);
    let svd = r.clone().svd(true, true);
    let (max, min) = svd
        .singular_values
        .iter()
        .fold((0.0f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    if min.is_nan() || min <= 0.0 {
        return None;
    }
    let cond = max / min;
    let pinv = svd.pseudo_inverse(0.0).ok()?;
    let check = &r * &pinv;
    let identity = DMatrix::<f64>::identity(rows.len(), rows.len());
    if (check - identity).amax() > BIORTHOGONALITY_TOL {
        return None;
    }
    Some(((0..rows.len()).map(|j| pinv.column(j).iter().copied().collect()).collect(), cond))
}

impl Codebook {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        symbol_dim: usize,
        role_dim: usize,
        scheme: Scheme,
        seed: u64,
        condition_number: f64,
        symbols: IndexMap<Symbol, Vec<f64>>,
        roles: IndexMap<Role, Vec<f64>>,
        unbind: IndexMap<Role, Vec<f64>>,
    ) -> Codebook {
        let symbol_pinv = symbol_pseudo_inverse(&symbols, symbol_dim);
        Codebook { symbol_dim, role_dim, scheme, seed, condition_number, symbols, roles, unbind, symbol_pinv }
    }

    pub fn symbol_dim(&self) -> usize {
        self.symbol_dim
    }

    pub fn role_dim(&self) -> usize {
        self.role_dim
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Condition number of the role matrix.
    pub fn condition_number(&self) -> f64 {
        self.condition_number
    }

    pub fn symbol_vec(&self, s: &Symbol) -> Result<&[f64], TprError> {
        self.symbols.get(s).map(Vec::as_slice).ok_or_else(|| TprError::UnknownSymbol(s.clone()))
    }

    pub fn role_vec(&self, r: &Role) -> Result<&[f64], TprError> {
        self.roles.get(r).map(Vec::as_slice).ok_or_else(|| TprError::UnknownRole(r.clone()))
    }

    pub fn unbind_vec(&self, r: &Role) -> Result<&[f64], TprError> {
        self.unbind.get(r).map(Vec::as_slice).ok_or_else(|| TprError::UnknownRole(r.clone()))
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.keys()
    }

    pub fn roles(&self) -> impl Iterator<Item = &Role> {
        self.roles.keys()
    }

    pub fn symbols_independent(&self) -> bool {
        self.symbol_pinv.is_some()
    }

    pub fn to_file(&self) -> CodebookFile {
        CodebookFile {
            symbol_dim: self.symbol_dim,
            role_dim: self.role_dim,
            scheme: self.scheme,
            seed: self.seed,
            condition_number: self.condition_number,
            symbols: self.symbols.iter().map(|(k, v)| (k.0.clone(), v.clone())).collect(),
            roles: self.roles.iter().map(|(k, v)| (k.0.clone(), v.clone())).collect(),
            unbind: self.unbind.iter().map(|(k, v)| (k.0.clone(), v.clone())).collect(),
        }
    }

    /// Rebuilds a codebook from its exported form. The unbinding basis is
    /// recomputed from the role vectors rather than trusted.
    pub fn from_file(f: CodebookFile) -> Result<Codebook, TprError> {
        let roles: IndexMap<Role, Vec<f64>> = f.roles.into_iter().map(|(k, v)| (Role(k), v)).collect();
        let symbols: IndexMap<Symbol, Vec<f64>> = f.symbols.into_iter().map(|(k, v)| (Symbol(k), v)).collect();
        if symbols.values().any(|v| v.len() != f.symbol_dim) {
            return Err(TprError::DimTooSmall { what: "symbol vector entries", dim: f.symbol_dim, count: 0 });
        }
        if roles.values().any(|v| v.len() != f.role_dim) {
            return Err(TprError::DimTooSmall { what: "role vector entries", dim: f.role_dim, count: 0 });
        }
        let rows: Vec<Vec<f64>> = roles.values().cloned().collect();
        let (u, cond) = unbinding_basis(&rows, f.role_dim).ok_or(TprError::IllConditioned(1))?;
        let unbind = roles.keys().cloned().zip(u).collect();
        Ok(Codebook::assemble(f.symbol_dim, f.role_dim, f.scheme, f.seed, cond, symbols, roles, unbind))
    }
}

fn symbol_pseudo_inverse(symbols: &IndexMap<Symbol, Vec<f64>>, dim: usize) -> Option<DMatrix<f64>> {
    if symbols.is_empty() || symbols.len() > dim {
        return None;
    }
    let cols: Vec<&Vec<f64>> = symbols.values().collect();
    let m = DMatrix::from_fn(dim, cols.len(), |i, j| cols[j][i]);
    let svd = m.svd(true, true);
    let (max, min) = svd
        .singular_values
        .iter()
        .fold((0.0f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    if min.is_nan() || min <= 0.0 || max / min > 1e10 {
        return None;
    }
    svd.pseudo_inverse(0.0).ok()
}

/// Exported codebook, for reproducibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookFile {
    pub symbol_dim: usize,
    pub role_dim: usize,
    pub scheme: Scheme,
    pub seed: u64,
    pub condition_number: f64,
    pub symbols: IndexMap<String, Vec<f64>>,
    pub roles: IndexMap<String, Vec<f64>>,
    pub unbind: IndexMap<String, Vec<f64>>,
}

/// Depth-indexed tensor family. Absent depths are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TprRep {
    symbol_dim: usize,
    role_dim: usize,
    components: BTreeMap<usize, Vec<f64>>,
}

impl TprRep {
    pub fn zeros(symbol_dim: usize, role_dim: usize) -> Self {
        TprRep { symbol_dim, role_dim, components: BTreeMap::new() }
    }

    /// Number of entries of the depth-`d` component, `σ·ρ^d`.
    pub fn component_len(&self, depth: usize) -> usize {
        self.symbol_dim * self.role_dim.pow(depth as u32)
    }

    pub fn component(&self, depth: usize) -> Option<&[f64]> {
        self.components.get(&depth).map(Vec::as_slice)
    }

    fn component_mut(&mut self, depth: usize) -> &mut Vec<f64> {
        let len = self.component_len(depth);
        self.components.entry(depth).or_insert_with(|| vec![0.0; len])
    }

    /// Deepest stored component.
    pub fn max_depth(&self) -> Option<usize> {
        self.components.keys().next_back().copied()
    }

    pub fn depths(&self) -> impl Iterator<Item = usize> + '_ {
        self.components.keys().copied()
    }

    /// Frobenius norm over all components.
    pub fn norm(&self) -> f64 {
        self.components.values().flatten().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn add_assign(&mut self, other: &TprRep) {
        for (&d, comp) in &other.components {
            for (a, b) in self.component_mut(d).iter_mut().zip(comp) {
                *a += b;
            }
        }
    }

    /// Largest absolute elementwise difference, treating absent depths as zero.
    pub fn max_abs_diff(&self, other: &TprRep) -> f64 {
        let depths: std::collections::BTreeSet<usize> = self.depths().chain(other.depths()).collect();
        let mut worst = 0.0f64;
        for d in depths {
            let len = self.component_len(d);
            let a = self.component(d);
            let b = other.component(d);
            for i in 0..len {
                let x = a.map_or(0.0, |v| v[i]);
                let y = b.map_or(0.0, |v| v[i]);
                worst = worst.max((x - y).abs());
            }
        }
        worst
    }

    /// Concatenation of components `0..=max_depth` in increasing depth,
    /// zero-filled where absent.
    pub fn flatten(&self, max_depth: usize) -> Vec<f64> {
        let mut out = Vec::new();
        for d in 0..=max_depth {
            match self.component(d) {
                Some(c) => out.extend_from_slice(c),
                None => out.resize(out.len() + self.component_len(d), 0.0),
            }
        }
        out
    }
}

fn outer(v: &[f64], r: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len() * r.len());
    for &x in v {
        out.extend(r.iter().map(|&y| x * y));
    }
    out
}

fn contract_last(t: &[f64], u: &[f64]) -> Vec<f64> {
    t.chunks_exact(u.len()).map(|block| block.iter().zip(u).map(|(a, b)| a * b).sum()).collect()
}

/// Sum over bindings of `s ⊗ r1 ⊗ .. ⊗ rd`.
pub fn tpr_encode(s: &Structure, cb: &Codebook) -> Result<TprRep, TprError> {
    let mut rep = TprRep::zeros(cb.symbol_dim, cb.role_dim);
    for (path, sym) in s.iter() {
        let mut v = cb.symbol_vec(sym)?.to_vec();
        for atom in path.atoms() {
            v = outer(&v, cb.role_vec(atom)?);
        }
        for (a, b) in rep.component_mut(path.len()).iter_mut().zip(&v) {
            *a += b;
        }
    }
    Ok(rep)
}

/// Binds every component to `role` as a new outermost axis.
pub fn tpr_bind(t: &TprRep, role: &Role, cb: &Codebook) -> Result<TprRep, TprError> {
    let r = cb.role_vec(role)?;
    let components = t.components.iter().map(|(&d, c)| (d + 1, outer(c, r))).collect();
    Ok(TprRep { components, ..TprRep::zeros(t.symbol_dim, t.role_dim) })
}

/// Contracts the outermost role axis of every component with `role`'s
/// unbinding vector. The depth-0 component is dropped.
pub fn tpr_unbind(t: &TprRep, role: &Role, cb: &Codebook) -> Result<TprRep, TprError> {
    let u = cb.unbind_vec(role)?;
    let components = t
        .components
        .iter()
        .filter(|(&d, _)| d > 0)
        .map(|(&d, c)| (d - 1, contract_last(c, u)))
        .collect();
    Ok(TprRep { components, ..TprRep::zeros(t.symbol_dim, t.role_dim) })
}

/// Iterated unbinding along `path`, outermost atom first.
pub fn tpr_query(t: &TprRep, path: &RolePath, cb: &Codebook) -> Result<TprRep, TprError> {
    let mut cur = t.clone();
    for role in path.atoms().iter().rev() {
        cur = tpr_unbind(&cur, role, cb)?;
    }
    Ok(cur)
}

/// Recovers the structure embedded in `t`.
///
/// Walks every role path up to `max_depth`, pruning branches whose unbound
/// tensor has vanished, and reads the symbol at each position off the
/// least-squares coefficients against the symbol matrix. `miss_tol` is
/// scaled by the norm of the smallest symbol vector.
pub fn tpr_decode(t: &TprRep, cb: &Codebook, max_depth: usize, miss_tol: f64) -> Result<Value, TprError> {
    let pinv = cb.symbol_pinv.as_ref().ok_or(TprError::DependentSymbols)?;
    let min_norm = cb.symbols.values().map(|v| norm(v)).fold(f64::INFINITY, f64::min);
    let tol = miss_tol * min_norm;
    if t.norm() < tol {
        return Ok(Value::Miss);
    }
    if let Some(d) = t.depths().find(|&d| d > max_depth && norm(t.component(d).unwrap()) >= tol) {
        return Err(TprError::TooDeep { depth: d, max_depth });
    }
    let mut found = Vec::new();
    let mut peeled = Vec::new();
    decode_walk(t, cb, pinv, tol, max_depth, &mut peeled, &mut found)?;
    if found.is_empty() {
        return Err(TprError::Undecodable(RolePath::empty()));
    }
    Ok(Value::Struct(Structure::from_bindings(found)?))
}

fn decode_walk(
    t: &TprRep,
    cb: &Codebook,
    pinv: &DMatrix<f64>,
    tol: f64,
    budget: usize,
    peeled: &mut Vec<Role>,
    found: &mut Vec<(RolePath, Symbol)>,
) -> Result<(), TprError> {
    let path = || RolePath(peeled.iter().rev().cloned().collect());
    if let Some(v) = t.component(0) {
        if norm(v) >= tol {
            let coef = pinv * nalgebra::DVector::from_column_slice(v);
            let mut hits = coef.iter().enumerate().filter(|(_, &c)| c > 0.5);
            let Some((k, &c)) = hits.next() else { return Err(TprError::Undecodable(path())) };
            if hits.next().is_some() {
                return Err(TprError::AmbiguousDecode(path()));
            }
            let (sym, sv) = cb.symbols.get_index(k).unwrap();
            let residual: f64 = v.iter().zip(sv).map(|(a, b)| (a - c * b).powi(2)).sum::<f64>().sqrt();
            if residual >= tol {
                return Err(TprError::Undecodable(path()));
            }
            found.push((path(), sym.clone()));
        }
    }
    if budget == 0 || t.max_depth().unwrap_or(0) == 0 {
        return Ok(());
    }
    for role in cb.roles.keys() {
        let child = tpr_unbind(t, role, cb)?;
        if child.norm() >= tol {
            peeled.push(role.clone());
            decode_walk(&child, cb, pinv, tol, budget - 1, peeled, found)?;
            peeled.pop();
        }
    }
    Ok(())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
