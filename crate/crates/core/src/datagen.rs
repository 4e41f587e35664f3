//! Seeded generator of expression/value pairs.
//!
//! Each pair index draws from its own ChaCha stream derived from
//! `(seed, index)`, so a dataset is reproducible regardless of how the index
//! range is partitioned across threads. Candidate expressions are built
//! constructively (sums only ever combine suffix-free paths) and then checked by
//! the evaluator; anything that fails is rejected and redrawn.

use std::collections::HashSet;
use std::fmt;
use std::io::Write;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::GenError;
use crate::eval::{eval, print_value, Structure, Value};
use crate::syntax::{print_expr, Alphabet, Expr, Role, RolePath, Symbol};

/// Consecutive rejected draws before the generator gives up.
pub const MAX_REJECTIONS: usize = 1000;

/// Pair categories, named after the kinds of example the corpus covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairType {
    Binding,
    Unbind,
    UnbindMiss,
    BindUnbindRebind,
    NestedUnbind,
}

impl PairType {
    pub const ALL: [PairType; 5] = [
        PairType::Binding,
        PairType::Unbind,
        PairType::UnbindMiss,
        PairType::BindUnbindRebind,
        PairType::NestedUnbind,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PairType::Binding => "binding",
            PairType::Unbind => "unbind",
            PairType::UnbindMiss => "unbind_miss",
            PairType::BindUnbindRebind => "bind_unbind_rebind",
            PairType::NestedUnbind => "nested_unbind",
        }
    }
}

impl fmt::Display for PairType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Relative weights over [`PairType`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TypeMix {
    pub binding: f64,
    pub unbind: f64,
    pub unbind_miss: f64,
    pub bind_unbind_rebind: f64,
    pub nested_unbind: f64,
}

impl Default for TypeMix {
    fn default() -> Self {
        TypeMix { binding: 1.0, unbind: 1.0, unbind_miss: 1.0, bind_unbind_rebind: 1.0, nested_unbind: 1.0 }
    }
}

impl TypeMix {
    /// All weight on one category.
    pub fn only(t: PairType) -> Self {
        let mut m = TypeMix { binding: 0.0, unbind: 0.0, unbind_miss: 0.0, bind_unbind_rebind: 0.0, nested_unbind: 0.0 };
        *m.weight_mut(t) = 1.0;
        m
    }

    pub fn weight(&self, t: PairType) -> f64 {
        match t {
            PairType::Binding => self.binding,
            PairType::Unbind => self.unbind,
            PairType::UnbindMiss => self.unbind_miss,
            PairType::BindUnbindRebind => self.bind_unbind_rebind,
            PairType::NestedUnbind => self.nested_unbind,
        }
    }

    fn weight_mut(&mut self, t: PairType) -> &mut f64 {
        match t {
            PairType::Binding => &mut self.binding,
            PairType::Unbind => &mut self.unbind,
            PairType::UnbindMiss => &mut self.unbind_miss,
            PairType::BindUnbindRebind => &mut self.bind_unbind_rebind,
            PairType::NestedUnbind => &mut self.nested_unbind,
        }
    }

    fn total(&self) -> f64 {
        PairType::ALL.iter().map(|&t| self.weight(t)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub seed: u64,
    pub num_pairs: usize,
    pub max_bindings_per_sum: usize,
    /// Longest role path of a binding inside a generated base structure.
    pub max_path_len: usize,
    /// Deepest wrapping of a structure in further roles (nested category).
    pub max_nesting_depth: usize,
    pub max_chained_queries: usize,
    /// When set, the combined weight of `unbind` and `unbind_miss` is re-split
    /// so that this fraction of query draws miss.
    pub query_miss_fraction: Option<f64>,
    pub type_mix: TypeMix,
    pub symbol_vocab: Vec<String>,
    pub role_vocab: Vec<String>,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            num_pairs: 10_000,
            max_bindings_per_sum: 4,
            max_path_len: 3,
            max_nesting_depth: 4,
            max_chained_queries: 4,
            query_miss_fraction: Some(0.1),
            type_mix: TypeMix::default(),
            symbol_vocab: default_symbol_vocab(),
            role_vocab: default_role_vocab(),
        }
    }
}

/// Every two-letter lowercase symbol, `aa` through `zz`.
pub fn default_symbol_vocab() -> Vec<String> {
    let letters = b'a'..=b'z';
    letters
        .clone()
        .flat_map(|a| letters.clone().map(move |b| String::from_utf8(vec![a, b]).unwrap()))
        .collect()
}

/// The single uppercase letters `A` through `Z`.
pub fn default_role_vocab() -> Vec<String> {
    (b'A'..=b'Z').map(|c| (c as char).to_string()).collect()
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: String| Err(GenError::InvalidConfig(m));
        for t in PairType::ALL {
            let w = self.type_mix.weight(t);
            if !(w.is_finite() && w >= 0.0) {
                return bad(format!("weight for {t} must be finite and non-negative"));
            }
        }
        if self.type_mix.total() <= 0.0 {
            return bad("type_mix weights are all zero".into());
        }
        if let Some(f) = self.query_miss_fraction {
            if !(0.0..=1.0).contains(&f) {
                return bad(format!("query_miss_fraction {f} outside [0, 1]"));
            }
        }
        for (name, v) in [
            ("max_bindings_per_sum", self.max_bindings_per_sum),
            ("max_path_len", self.max_path_len),
            ("max_nesting_depth", self.max_nesting_depth),
            ("max_chained_queries", self.max_chained_queries),
        ] {
            if v == 0 {
                return bad(format!("{name} must be at least 1"));
            }
        }
        if self.symbol_vocab.is_empty() || self.role_vocab.is_empty() {
            return bad("symbol and role vocabularies must be non-empty".into());
        }
        let alphabet = Alphabet::default();
        if let Some(s) = self.symbol_vocab.iter().find(|s| !alphabet.is_symbol(s)) {
            return bad(format!("vocabulary symbol {s:?} is not a valid symbol"));
        }
        if let Some(r) = self.role_vocab.iter().find(|r| !alphabet.is_role(r) || alphabet.is_symbol(r)) {
            return bad(format!("vocabulary role {r:?} is not a valid role"));
        }
        Ok(())
    }

    /// Category weights after applying `query_miss_fraction`.
    pub fn effective_mix(&self) -> TypeMix {
        let mut mix = self.type_mix;
        if let Some(f) = self.query_miss_fraction {
            let mass = mix.unbind + mix.unbind_miss;
            mix.unbind = mass * (1.0 - f);
            mix.unbind_miss = mass * f;
        }
        mix
    }

    fn choose_type<R: Rng>(&self, rng: &mut R) -> PairType {
        let mix = self.effective_mix();
        let mut x = rng.random::<f64>() * mix.total();
        for t in PairType::ALL {
            let w = mix.weight(t);
            if x < w {
                return t;
            }
            x -= w;
        }
        // Rounding can leave x just past the last bucket.
        *PairType::ALL.iter().rev().find(|&&t| mix.weight(t) > 0.0).unwrap()
    }
}

/// One generated expression with its oracle value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DataPair {
    pub input: String,
    pub target: String,
    #[serde(rename = "type")]
    pub type_tag: PairType,
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub expr: Expr,
    pub value: Value,
    pub kind: PairType,
}

/// Draws one valid expression of a randomly chosen category.
pub fn sample_expr<R: Rng>(cfg: &GenConfig, rng: &mut R) -> Result<Expr, GenError> {
    sample(cfg, rng).map(|s| s.expr)
}

pub fn sample<R: Rng>(cfg: &GenConfig, rng: &mut R) -> Result<Sample, GenError> {
    let kind = cfg.choose_type(rng);
    sample_of_type(cfg, kind, rng)
}

/// Draws one valid expression of category `kind`, by rejection.
pub fn sample_of_type<R: Rng>(cfg: &GenConfig, kind: PairType, rng: &mut R) -> Result<Sample, GenError> {
    let vocab = Vocab::new(cfg);
    for _ in 0..MAX_REJECTIONS {
        let Some(expr) = propose(cfg, &vocab, kind, rng) else { continue };
        let Ok(value) = eval(&expr) else { continue };
        if value.is_miss() == (kind == PairType::UnbindMiss) {
            return Ok(Sample { expr, value, kind });
        }
    }
    Err(GenError::GenExhausted(MAX_REJECTIONS))
}

struct Vocab {
    symbols: Vec<Symbol>,
    roles: Vec<Role>,
}

impl Vocab {
    fn new(cfg: &GenConfig) -> Self {
        Vocab {
            symbols: cfg.symbol_vocab.iter().map(Symbol::new).collect(),
            roles: cfg.role_vocab.iter().map(Role::new).collect(),
        }
    }

    fn role<R: Rng>(&self, rng: &mut R) -> Role {
        self.roles.choose(rng).unwrap().clone()
    }
}

/// Random structure of 1..=`max_bindings` bindings with paths of length
/// 1..=`max_path_len`, suffix-free by construction. Returns `None` when the
/// role vocabulary cannot supply enough distinct positions in reasonable time.
pub fn random_structure<R: Rng>(
    rng: &mut R,
    symbols: &[Symbol],
    roles: &[Role],
    max_bindings: usize,
    max_path_len: usize,
) -> Option<Structure> {
    let k = rng.random_range(1..=max_bindings);
    structure_with_bindings(rng, symbols, roles, k, max_path_len)
}

/// Structure with exactly `k` bindings.
pub fn structure_with_bindings<R: Rng>(
    rng: &mut R,
    symbols: &[Symbol],
    roles: &[Role],
    k: usize,
    max_path_len: usize,
) -> Option<Structure> {
    let mut s = Structure::new();
    let mut failures = 0;
    while s.len() < k {
        let len = rng.random_range(1..=max_path_len);
        let path = RolePath((0..len).map(|_| roles.choose(rng).unwrap().clone()).collect());
        if s.conflict_with(&path).is_some() {
            failures += 1;
            if failures > 100 {
                return None;
            }
            continue;
        }
        let sym = symbols.choose(rng).unwrap().clone();
        s.insert(path, sym).ok()?;
    }
    Some(s)
}

/// Splits a query path (innermost first) into 1..=`max_chain` consecutive
/// segments and applies them outermost segment first.
fn chain_query<R: Rng>(subject: Expr, path: &RolePath, max_chain: usize, rng: &mut R) -> Expr {
    let atoms = path.atoms();
    let pieces = rng.random_range(1..=max_chain.min(atoms.len()));
    // Choose pieces-1 distinct cut points among the interior boundaries.
    let mut cuts: Vec<usize> = rand::seq::index::sample(rng, atoms.len() - 1, pieces - 1)
        .into_iter()
        .map(|i| i + 1)
        .collect();
    cuts.sort_unstable();
    let mut bounds = Vec::with_capacity(pieces + 1);
    bounds.push(0);
    bounds.extend(cuts);
    bounds.push(atoms.len());
    bounds
        .windows(2)
        .rev()
        .fold(subject, |e, w| Expr::query(e, RolePath(atoms[w[0]..w[1]].to_vec())))
}

/// A query path that hits `s`: a non-empty suffix of one of its binding paths.
fn hitting_path<R: Rng>(s: &Structure, rng: &mut R) -> Option<RolePath> {
    let bound: Vec<&RolePath> = s.iter().map(|(p, _)| p).filter(|p| !p.is_empty()).collect();
    let p = bound.choose(rng)?;
    let len = rng.random_range(1..=p.len());
    Some(RolePath(p.atoms()[p.len() - len..].to_vec()))
}

fn propose<R: Rng>(cfg: &GenConfig, vocab: &Vocab, kind: PairType, rng: &mut R) -> Option<Expr> {
    let base = random_structure(rng, &vocab.symbols, &vocab.roles, cfg.max_bindings_per_sum, cfg.max_path_len)?;
    let base_expr = base.to_expr()?;
    let chain = cfg.max_chained_queries;
    match kind {
        PairType::Binding => Some(base_expr),
        PairType::Unbind => {
            let q = hitting_path(&base, rng)?;
            Some(chain_query(base_expr, &q, chain, rng))
        }
        PairType::UnbindMiss => {
            // Follow a hit for zero or more steps, then step off the tree.
            let prefix = if rng.random_bool(0.5) { hitting_path(&base, rng)? } else { RolePath::empty() };
            let mut atoms = vec![vocab.role(rng)];
            atoms.extend(prefix.atoms().iter().cloned());
            Some(chain_query(base_expr, &RolePath(atoms), chain, rng))
        }
        PairType::BindUnbindRebind => {
            if base.len() < 2 && cfg.max_bindings_per_sum >= 2 {
                return None;
            }
            let q = hitting_path(&base, rng)?;
            let queried = chain_query(base_expr, &q, chain, rng);
            let rebinds = rng.random_range(1..=2);
            Some((0..rebinds).fold(queried, |e, _| Expr::Bind { child: Box::new(e), role: vocab.role(rng) }))
        }
        PairType::NestedUnbind => {
            let depth = rng.random_range(1..=cfg.max_nesting_depth);
            let wraps: Vec<Role> = (0..depth).map(|_| vocab.role(rng)).collect();
            let nested = wraps
                .iter()
                .fold(base_expr, |e, r| Expr::Bind { child: Box::new(e), role: r.clone() });
            let most = depth.min(chain);
            let peel = if rng.random_bool(0.5) { most } else { rng.random_range(1..=most) };
            Some(
                wraps
                    .iter()
                    .rev()
                    .take(peel)
                    .fold(nested, |e, r| Expr::query(e, RolePath(vec![r.clone()]))),
            )
        }
    }
}

/// The independent random stream for pair index `index`.
pub fn index_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

const CHUNK: usize = 4096;

/// Generates exactly `cfg.num_pairs` pairs, unique on input text.
pub fn generate_dataset(cfg: &GenConfig) -> Result<Vec<DataPair>, GenError> {
    cfg.validate()?;
    let mut seen = HashSet::with_capacity(cfg.num_pairs);
    let mut out = Vec::with_capacity(cfg.num_pairs);
    let mut next_index: u64 = 0;
    let mut stale = 0usize;
    while out.len() < cfg.num_pairs {
        let want = (cfg.num_pairs - out.len()).clamp(64, CHUNK) as u64;
        let batch: Vec<Result<DataPair, GenError>> = (next_index..next_index + want)
            .into_par_iter()
            .map(|i| {
                let mut rng = index_rng(cfg.seed, i);
                let s = sample(cfg, &mut rng)?;
                Ok(DataPair { input: print_expr(&s.expr), target: print_value(&s.value), type_tag: s.kind })
            })
            .collect();
        next_index += want;
        for pair in batch {
            let pair = pair?;
            if out.len() == cfg.num_pairs {
                break;
            }
            if seen.insert(pair.input.clone()) {
                out.push(pair);
                stale = 0;
            } else {
                stale += 1;
                if stale >= MAX_REJECTIONS {
                    return Err(GenError::GenExhausted(MAX_REJECTIONS));
                }
            }
        }
    }
    Ok(out)
}

/// Writes pairs as JSON Lines.
pub fn write_jsonl<W: Write>(pairs: &[DataPair], mut w: W) -> std::io::Result<()> {
    for p in pairs {
        serde_json::to_writer(&mut w, p)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// Reads JSON Lines pairs; blank lines are skipped.
pub fn read_jsonl<R: std::io::BufRead>(r: R) -> crate::Result<Vec<DataPair>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let pair = serde_json::from_str(&line)
            .map_err(|e| crate::Error::Format { line: i + 1, message: e.to_string() })?;
        out.push(pair);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

/// Routes an input to a split by a hash of its text (default 90/5/5), so
/// an input can never land in two splits.
pub fn split_of(input: &str) -> Split {
    split_with(input, 90, 5)
}

pub fn split_with(input: &str, train_pct: u64, dev_pct: u64) -> Split {
    let digest = Sha256::digest(input.as_bytes());
    let bucket = u64::from_le_bytes(digest[..8].try_into().unwrap()) % 100;
    if bucket < train_pct {
        Split::Train
    } else if bucket < train_pct + dev_pct {
        Split::Dev
    } else {
        Split::Test
    }
}
