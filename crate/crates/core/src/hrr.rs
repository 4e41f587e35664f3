//! Holographic reduced representations.
//!
//! Bindings are circular convolutions of n-dimensional gaussian vectors.
//! Plain convolution is commutative, which would make `b:L:R` and `b:R:L`
//! indistinguishable, so by default the partial encoding is passed through a
//! fixed permutation before each role is convolved in. Unbinding is
//! approximate and needs a clean-up step against the symbol codebook.

use std::cell::RefCell;
use std::sync::Arc;

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::datagen::{index_rng, structure_with_bindings};
use crate::error::HrrError;
use crate::eval::{Structure, Value};
use crate::syntax::{Role, RolePath, Symbol};

pub const DEFAULT_TAU: f64 = 0.25;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plans(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(n), p.plan_fft_inverse(n))
    })
}

fn spectrum(x: &[f64], fft: &dyn Fft<f64>) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft.process(&mut buf);
    buf
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<(), HrrError> {
    if a.len() != b.len() {
        return Err(HrrError::LengthMismatch(a.len(), b.len()));
    }
    Ok(())
}

/// Circular convolution `[a ⊛ b]_μ = Σ_ν a_ν b_{(μ−ν) mod n}`, via FFT.
pub fn cconv(a: &[f64], b: &[f64]) -> Result<Vec<f64>, HrrError> {
    check_lengths(a, b)?;
    let n = a.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let (fwd, inv) = plans(n);
    let fa = spectrum(a, fwd.as_ref());
    let fb = spectrum(b, fwd.as_ref());
    let mut prod: Vec<Complex<f64>> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    inv.process(&mut prod);
    let scale = 1.0 / n as f64;
    Ok(prod.into_iter().map(|c| c.re * scale).collect())
}

/// Direct O(n²) circular convolution.
pub fn cconv_direct(a: &[f64], b: &[f64]) -> Result<Vec<f64>, HrrError> {
    check_lengths(a, b)?;
    let n = a.len();
    Ok((0..n).map(|mu| (0..n).map(|nu| a[nu] * b[(n + mu - nu) % n]).sum()).collect())
}

/// Index reflection `x[i] ↦ x[(n − i) mod n]`, the approximate inverse under
/// circular convolution.
pub fn involution(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    (0..n).map(|i| a[(n - i) % n]).collect()
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PermuteMode {
    Plain,
    #[default]
    Permuted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnbindMode {
    /// Convolve with the involution of the role vector.
    #[default]
    Correlation,
    /// Convolve with the role vector itself.
    #[serde(rename = "self")]
    SelfInverse,
}

impl UnbindMode {
    pub fn name(self) -> &'static str {
        match self {
            UnbindMode::Correlation => "correlation",
            UnbindMode::SelfInverse => "self",
        }
    }
}

#[derive(Debug, Clone)]
pub struct HrrCodebook {
    dim: usize,
    seed: u64,
    permute_mode: PermuteMode,
    permutation: Vec<usize>,
    inverse_permutation: Vec<usize>,
    symbols: IndexMap<Symbol, Vec<f64>>,
    roles: IndexMap<Role, Vec<f64>>,
}

/// Draws gaussian vectors with entries of variance 1/n; any vector whose
/// norm falls outside [0.5, 1.5] is redrawn.
pub fn make_hrr_codebook(
    symbols: &[Symbol],
    roles: &[Role],
    dim: usize,
    permute_mode: PermuteMode,
    seed: u64,
) -> Result<HrrCodebook, HrrError> {
    if dim == 0 {
        return Err(HrrError::BadDimension(dim));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut permutation: Vec<usize> = (0..dim).collect();
    permutation.shuffle(&mut rng);
    let mut inverse_permutation = vec![0; dim];
    for (i, &p) in permutation.iter().enumerate() {
        inverse_permutation[p] = i;
    }
    let normal = Normal::new(0.0, 1.0 / (dim as f64).sqrt()).unwrap();
    let mut draw = || loop {
        let v: Vec<f64> = (0..dim).map(|_| normal.sample(&mut rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (0.5..=1.5).contains(&norm) {
            return v;
        }
    };
    let symbols = symbols.iter().map(|s| (s.clone(), draw())).collect();
    let roles = roles.iter().map(|r| (r.clone(), draw())).collect();
    Ok(HrrCodebook { dim, seed, permute_mode, permutation, inverse_permutation, symbols, roles })
}

impl HrrCodebook {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn permute_mode(&self) -> PermuteMode {
        self.permute_mode
    }

    pub fn symbol_vec(&self, s: &Symbol) -> Result<&[f64], HrrError> {
        self.symbols.get(s).map(Vec::as_slice).ok_or_else(|| HrrError::UnknownSymbol(s.clone()))
    }

    pub fn role_vec(&self, r: &Role) -> Result<&[f64], HrrError> {
        self.roles.get(r).map(Vec::as_slice).ok_or_else(|| HrrError::UnknownRole(r.clone()))
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.keys()
    }

    pub fn roles(&self) -> impl Iterator<Item = &Role> {
        self.roles.keys()
    }

    fn permute(&self, v: &[f64]) -> Vec<f64> {
        match self.permute_mode {
            PermuteMode::Plain => v.to_vec(),
            PermuteMode::Permuted => self.permutation.iter().map(|&p| v[p]).collect(),
        }
    }

    fn unpermute(&self, v: &[f64]) -> Vec<f64> {
        match self.permute_mode {
            PermuteMode::Plain => v.to_vec(),
            PermuteMode::Permuted => self.inverse_permutation.iter().map(|&p| v[p]).collect(),
        }
    }

    pub fn to_file(&self) -> HrrCodebookFile {
        HrrCodebookFile {
            dim: self.dim,
            seed: self.seed,
            permute_mode: self.permute_mode,
            permutation: self.permutation.clone(),
            symbols: self.symbols.iter().map(|(k, v)| (k.0.clone(), v.clone())).collect(),
            roles: self.roles.iter().map(|(k, v)| (k.0.clone(), v.clone())).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HrrCodebookFile {
    pub dim: usize,
    pub seed: u64,
    pub permute_mode: PermuteMode,
    pub permutation: Vec<usize>,
    pub symbols: IndexMap<String, Vec<f64>>,
    pub roles: IndexMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HrrRep {
    pub vec: Vec<f64>,
}

impl HrrRep {
    pub fn zeros(dim: usize) -> Self {
        HrrRep { vec: vec![0.0; dim] }
    }
}

/// Encoding of one binding: `bind ← cconv(P(bind), r)` for each atom, inner
/// to outer, starting from the symbol vector.
pub fn encode_binding(sym: &Symbol, path: &RolePath, cb: &HrrCodebook) -> Result<Vec<f64>, HrrError> {
    let mut v = cb.symbol_vec(sym)?.to_vec();
    for atom in path.atoms() {
        v = cconv(&cb.permute(&v), cb.role_vec(atom)?)?;
    }
    Ok(v)
}

pub fn hrr_encode(s: &Structure, cb: &HrrCodebook) -> Result<HrrRep, HrrError> {
    let mut out = HrrRep::zeros(cb.dim);
    for (path, sym) in s.iter() {
        for (a, b) in out.vec.iter_mut().zip(encode_binding(sym, path, cb)?) {
            *a += b;
        }
    }
    Ok(out)
}

pub fn hrr_bind(h: &HrrRep, role: &Role, cb: &HrrCodebook) -> Result<HrrRep, HrrError> {
    Ok(HrrRep { vec: cconv(&cb.permute(&h.vec), cb.role_vec(role)?)? })
}

/// Noisy estimate of what `h` holds in `role`.
pub fn hrr_unbind(h: &HrrRep, role: &Role, cb: &HrrCodebook, mode: UnbindMode) -> Result<HrrRep, HrrError> {
    let r = cb.role_vec(role)?;
    let key = match mode {
        UnbindMode::Correlation => involution(r),
        UnbindMode::SelfInverse => r.to_vec(),
    };
    Ok(HrrRep { vec: cb.unpermute(&cconv(&h.vec, &key)?) })
}

/// Iterated unbinding along `path`, outermost atom first.
pub fn hrr_query(h: &HrrRep, path: &RolePath, cb: &HrrCodebook, mode: UnbindMode) -> Result<HrrRep, HrrError> {
    let mut cur = h.clone();
    for role in path.atoms().iter().rev() {
        cur = hrr_unbind(&cur, role, cb, mode)?;
    }
    Ok(cur)
}

/// Nearest symbol by cosine, if it clears `tau`. Ties go to the earlier symbol.
pub fn cleanup(v: &[f64], cb: &HrrCodebook, tau: f64) -> Option<Symbol> {
    best_match(v, cb).filter(|(_, c)| *c >= tau).map(|(s, _)| s.clone())
}

fn best_match<'a>(v: &[f64], cb: &'a HrrCodebook) -> Option<(&'a Symbol, f64)> {
    let mut best: Option<(&Symbol, f64)> = None;
    for (sym, sv) in &cb.symbols {
        let c = cosine(v, sv);
        if best.is_none_or(|(_, b)| c > b) {
            best = Some((sym, c));
        }
    }
    best
}

/// Structure-valued decode: every role path up to `max_depth` (including the
/// empty path) is unbound and cleaned up; bindings that clear `tau` are kept,
/// strongest first, skipping any that would conflict with a stronger one.
pub fn hrr_decode(
    h: &HrrRep,
    cb: &HrrCodebook,
    max_depth: usize,
    tau: f64,
    mode: UnbindMode,
) -> Result<Value, HrrError> {
    let mut candidates = Vec::new();
    let mut frontier = vec![(Vec::<Role>::new(), h.clone())];
    for depth in 0..=max_depth {
        let mut next = Vec::new();
        for (peeled, v) in frontier {
            if let Some((sym, c)) = best_match(&v.vec, cb) {
                if c >= tau {
                    candidates.push((RolePath(peeled.iter().rev().cloned().collect()), sym.clone(), c));
                }
            }
            if depth < max_depth {
                for role in cb.roles.keys() {
                    let child = hrr_unbind(&v, role, cb, mode)?;
                    let mut p = peeled.clone();
                    p.push(role.clone());
                    next.push((p, child));
                }
            }
        }
        frontier = next;
    }
    candidates.sort_by(|a, b| b.2.total_cmp(&a.2));
    let mut s = Structure::new();
    for (path, sym, _) in candidates {
        if s.conflict_with(&path).is_none() {
            s.insert(path, sym).expect("conflict checked");
        }
    }
    Ok(if s.is_empty() { Value::Miss } else { Value::Struct(s) })
}

/// Settings for the clean-up capacity sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub dims: Vec<usize>,
    pub trials: usize,
    pub bindings: usize,
    pub max_depth: usize,
    pub tau: f64,
    pub permute_mode: PermuteMode,
    pub modes: Vec<UnbindMode>,
    /// Symbols in the clean-up memory.
    pub symbols: Vec<String>,
    pub roles: Vec<String>,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            dims: vec![256, 512, 1024, 2048],
            trials: 1000,
            bindings: 3,
            max_depth: 2,
            tau: DEFAULT_TAU,
            permute_mode: PermuteMode::Permuted,
            modes: vec![UnbindMode::Correlation, UnbindMode::SelfInverse],
            symbols: crate::datagen::default_symbol_vocab().into_iter().take(64).collect(),
            roles: crate::datagen::default_role_vocab(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub mode: String,
    pub depth: usize,
    pub bindings: usize,
    pub accuracy: f64,
    pub mean_cosine: f64,
}

/// Single-symbol query accuracy after clean-up, per dimension and unbinding
/// mode. Trial `t` uses the same structure and query at every dimension and a
/// fresh codebook for each (dimension, trial).
pub fn capacity_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>, HrrError> {
    let symbols: Vec<Symbol> = cfg.symbols.iter().map(Symbol::new).collect();
    let roles: Vec<Role> = cfg.roles.iter().map(Role::new).collect();
    let mut rows = Vec::new();
    for &n in &cfg.dims {
        for &mode in &cfg.modes {
            let outcomes: Vec<(bool, f64)> = (0..cfg.trials as u64)
                .into_par_iter()
                .map(|t| {
                    let mut rng = index_rng(cfg.seed, t);
                    let s = structure_with_bindings(&mut rng, &symbols, &roles, cfg.bindings, cfg.max_depth)
                        .expect("role vocabulary supports the requested bindings");
                    let pick = rand::Rng::random_range(&mut rng, 0..s.len());
                    let (path, target) = s.iter().nth(pick).unwrap();
                    let codebook_seed = cfg.seed ^ (n as u64).rotate_left(32) ^ t.wrapping_mul(0x9E37_79B9_7F4A_7C15);
                    let cb = make_hrr_codebook(&symbols, &roles, n, cfg.permute_mode, codebook_seed)?;
                    let h = hrr_encode(&s, &cb)?;
                    let est = hrr_query(&h, path, &cb, mode)?;
                    let hit = cleanup(&est.vec, &cb, cfg.tau).as_ref() == Some(target);
                    Ok((hit, cosine(&est.vec, cb.symbol_vec(target)?)))
                })
                .collect::<Result<_, HrrError>>()?;
            let trials = outcomes.len().max(1) as f64;
            rows.push(SweepRow {
                n,
                mode: mode.name().to_string(),
                depth: cfg.max_depth,
                bindings: cfg.bindings,
                accuracy: outcomes.iter().filter(|(h, _)| *h).count() as f64 / trials,
                mean_cosine: outcomes.iter().map(|(_, c)| c).sum::<f64>() / trials,
            });
        }
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: std::io::Write>(rows: &[SweepRow], w: W) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}
