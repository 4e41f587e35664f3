//! Superposition batteries.
//!
//! A *shared* quadruple `aa:A + bb:B`, `aa:A + cc:C`, `dd:D + bb:B`,
//! `dd:D + cc:C` has `[v1 − v2] − [v3 − v4] = 0` under any additive embedding,
//! while a *disjoint* quadruple (second pair built from fresh tokens) does
//! not. The norm distributions of the two kinds are compared by a rank AUC.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::index::sample as sample_indices;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::index_rng;
use crate::error::{Error, SuperpositionError};
use crate::eval::{eval, Structure, Value};
use crate::hrr::{hrr_encode, HrrCodebook};
use crate::syntax::{parse_str, print_expr};
use crate::tpr::{tpr_encode, Codebook};
use crate::vectors::{normalize_expr, VectorRecord};

type Result<T, E = SuperpositionError> = std::result::Result<T, E>;

/// Above this many cross pairs the AUC switches to the rank-sum formula.
pub const PAIRWISE_LIMIT: u64 = 10_000_000;
pub const HISTOGRAM_BINS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadKind {
    Shared,
    Disjoint,
}

impl QuadKind {
    pub fn name(self) -> &'static str {
        match self {
            QuadKind::Shared => "shared",
            QuadKind::Disjoint => "disjoint",
        }
    }

    /// Distinct symbols (and, separately, roles) a quadruple of this kind uses.
    pub fn tokens_needed(self) -> usize {
        match self {
            QuadKind::Shared => 4,
            QuadKind::Disjoint => 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quadruple {
    pub e1: String,
    pub e2: String,
    pub e3: String,
    pub e4: String,
    pub kind: QuadKind,
}

impl Quadruple {
    pub fn exprs(&self) -> [&str; 4] {
        [&self.e1, &self.e2, &self.e3, &self.e4]
    }

    /// Builds the quadruple for the given symbols `s` and roles `r`.
    /// Shared uses the first four of each, disjoint the first six.
    pub fn from_tokens(kind: QuadKind, s: &[&str], r: &[&str]) -> Self {
        let b = |i: usize, j: usize| format!("{}:{} + {}:{}", s[i], r[i], s[j], r[j]);
        match kind {
            QuadKind::Shared => Quadruple { e1: b(0, 1), e2: b(0, 2), e3: b(3, 1), e4: b(3, 2), kind },
            QuadKind::Disjoint => Quadruple { e1: b(0, 1), e2: b(0, 2), e3: b(3, 4), e4: b(3, 5), kind },
        }
    }

    /// The king/queen analogy written as a shared quadruple over the roles
    /// gender (`G`) and status (`S`).
    pub fn analogy_preset() -> Self {
        Quadruple {
            e1: "mm:G + rr:S".into(),
            e2: "mm:G + cc:S".into(),
            e3: "ff:G + rr:S".into(),
            e4: "ff:G + cc:S".into(),
            kind: QuadKind::Shared,
        }
    }
}

/// Draws `count` quadruples; tokens are sampled without replacement within a
/// quadruple and independently across quadruples.
pub fn gen_quadruples(kind: QuadKind, count: usize, symbols: &[String], roles: &[String], seed: u64) -> Result<Vec<Quadruple>> {
    let need = kind.tokens_needed();
    if symbols.len() < need || roles.len() < need {
        return Err(SuperpositionError::VocabTooSmall { need, symbols: symbols.len(), roles: roles.len() });
    }
    let salt = match kind {
        QuadKind::Shared => 0x5348_4152_4544,
        QuadKind::Disjoint => 0x4449_534a_4f49,
    };
    Ok((0..count as u64)
        .map(|i| {
            let mut rng = index_rng(seed ^ salt, i);
            let s: Vec<&str> = sample_indices(&mut rng, symbols.len(), need).iter().map(|k| symbols[k].as_str()).collect();
            let r: Vec<&str> = sample_indices(&mut rng, roles.len(), need).iter().map(|k| roles[k].as_str()).collect();
            Quadruple::from_tokens(kind, &s, &r)
        })
        .collect())
}

/// Every expression a battery needs, including the single-binding halves used
/// by [`additivity_gap`], in first-appearance order.
pub fn battery_expressions(quads: &[Quadruple]) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut push = |e: String| {
        if seen.insert(e.clone()) {
            out.push(e);
        }
    };
    for q in quads {
        for e in q.exprs() {
            push(e.to_string());
            if let Ok([a, b]) = split_two_bindings(e) {
                push(a);
                push(b);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Tpr,
    Hrr,
    Imported,
}

/// Anything that maps expression text to a fixed-length vector.
pub trait VectorSource: Sync {
    fn origin(&self) -> Origin;
    fn dim(&self) -> usize;
    fn vector(&self, expr: &str) -> Result<Vec<f64>>;
}

fn structure_of(expr: &str) -> Result<Structure> {
    let wrap = |e: Error| SuperpositionError::Expr { expr: expr.to_string(), source: Box::new(e) };
    let parsed = parse_str(expr).map_err(|e| wrap(e.into()))?;
    match eval(&parsed).map_err(|e| wrap(e.into()))? {
        Value::Struct(s) => Ok(s),
        Value::Miss => Err(SuperpositionError::MissingVector(expr.to_string())),
    }
}

/// Embeds expressions by evaluating them and taking the flattened TPR,
/// components `0..=max_depth`.
pub struct TprSource<'a> {
    pub codebook: &'a Codebook,
    pub max_depth: usize,
}

impl VectorSource for TprSource<'_> {
    fn origin(&self) -> Origin {
        Origin::Tpr
    }

    fn dim(&self) -> usize {
        let (s, r) = (self.codebook.symbol_dim(), self.codebook.role_dim());
        (0..=self.max_depth).map(|d| s * r.pow(d as u32)).sum()
    }

    fn vector(&self, expr: &str) -> Result<Vec<f64>> {
        let s = structure_of(expr)?;
        let t = tpr_encode(&s, self.codebook)
            .map_err(|e| SuperpositionError::Expr { expr: expr.to_string(), source: Box::new(e.into()) })?;
        Ok(t.flatten(self.max_depth))
    }
}

pub struct HrrSource<'a> {
    pub codebook: &'a HrrCodebook,
}

impl VectorSource for HrrSource<'_> {
    fn origin(&self) -> Origin {
        Origin::Hrr
    }

    fn dim(&self) -> usize {
        self.codebook.dim()
    }

    fn vector(&self, expr: &str) -> Result<Vec<f64>> {
        let s = structure_of(expr)?;
        hrr_encode(&s, self.codebook)
            .map(|h| h.vec)
            .map_err(|e| SuperpositionError::Expr { expr: expr.to_string(), source: Box::new(e.into()) })
    }
}

/// Vectors read from the shared JSON Lines format, e.g. learned encodings.
#[derive(Debug, Clone)]
pub struct ImportedSource {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl ImportedSource {
    pub fn new(records: Vec<VectorRecord>) -> Result<Self> {
        let dim = records.first().map_or(0, |r| r.vector.len());
        let mut vectors = HashMap::with_capacity(records.len());
        for r in records {
            if r.vector.len() != dim {
                return Err(SuperpositionError::DimensionMismatch { expr: r.expr, got: r.vector.len(), expected: dim });
            }
            let key = normalize_expr(&r.expr).unwrap_or(r.expr);
            vectors.insert(key, r.vector);
        }
        Ok(ImportedSource { dim, vectors })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

impl VectorSource for ImportedSource {
    fn origin(&self) -> Origin {
        Origin::Imported
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn vector(&self, expr: &str) -> Result<Vec<f64>> {
        let key = normalize_expr(expr).unwrap_or_else(|_| expr.to_string());
        self.vectors.get(&key).cloned().ok_or(SuperpositionError::MissingVector(key))
    }
}

fn l2(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x * x).sum::<f64>().sqrt()
}

/// `‖[v(e1) − v(e2)] − [v(e3) − v(e4)]‖₂`.
pub fn lhs_norm(q: &Quadruple, src: &dyn VectorSource) -> Result<f64> {
    let [v1, v2, v3, v4] = [src.vector(&q.e1)?, src.vector(&q.e2)?, src.vector(&q.e3)?, src.vector(&q.e4)?];
    let n = v1.len();
    for (e, v) in q.exprs().iter().zip([&v2, &v3, &v4]) {
        if v.len() != n {
            return Err(SuperpositionError::DimensionMismatch { expr: e.to_string(), got: v.len(), expected: n });
        }
    }
    Ok(l2((0..n).map(|i| (v1[i] - v2[i]) - (v3[i] - v4[i]))))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormSample {
    pub kind: QuadKind,
    pub norms: Vec<f64>,
}

impl NormSample {
    pub fn mean(&self) -> f64 {
        self.norms.iter().sum::<f64>() / self.norms.len() as f64
    }

    pub fn median(&self) -> f64 {
        let mut v = self.norms.clone();
        v.sort_by(f64::total_cmp);
        let m = v.len() / 2;
        if v.len().is_multiple_of(2) {
            (v[m - 1] + v[m]) / 2.0
        } else {
            v[m]
        }
    }
}

/// LHS norms of a battery, evaluated in parallel. Every quadruple must be of
/// the same kind.
pub fn battery_norms(kind: QuadKind, quads: &[Quadruple], src: &dyn VectorSource) -> Result<NormSample> {
    let norms = quads.par_iter().map(|q| lhs_norm(q, src)).collect::<Result<Vec<_>>>()?;
    if norms.iter().any(|x| !x.is_finite()) {
        return Err(SuperpositionError::NonFinite);
    }
    Ok(NormSample { kind, norms })
}

fn check_samples(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(SuperpositionError::EmptySample);
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(SuperpositionError::NonFinite);
    }
    Ok(())
}

/// `P(a < b) + ½·P(a = b)` over `a ∈ shared`, `b ∈ disjoint`.
pub fn auc(shared: &NormSample, disjoint: &NormSample) -> Result<f64> {
    let pairs = shared.norms.len() as u64 * disjoint.norms.len() as u64;
    if pairs <= PAIRWISE_LIMIT {
        auc_pairwise(&shared.norms, &disjoint.norms)
    } else {
        auc_rank_sum(&shared.norms, &disjoint.norms)
    }
}

// Both routes produce the doubled U statistic as an integer and divide once,
// so they agree bit for bit.
fn from_doubled_u(doubled: u128, na: usize, nb: usize) -> f64 {
    doubled as f64 / (2 * na as u128 * nb as u128) as f64
}

/// Exhaustive count over all cross pairs.
pub fn auc_pairwise(a: &[f64], b: &[f64]) -> Result<f64> {
    check_samples(a, b)?;
    let mut doubled: u128 = 0;
    for &x in a {
        for &y in b {
            if x < y {
                doubled += 2;
            } else if x == y {
                doubled += 1;
            }
        }
    }
    Ok(from_doubled_u(doubled, a.len(), b.len()))
}

/// Mann–Whitney rank-sum form with midranks for ties.
pub fn auc_rank_sum(a: &[f64], b: &[f64]) -> Result<f64> {
    check_samples(a, b)?;
    // `+ 0.0` folds -0.0 into 0.0 so sorting agrees with `==`.
    let mut pooled: Vec<(f64, bool)> =
        a.iter().map(|&x| (x + 0.0, false)).chain(b.iter().map(|&y| (y + 0.0, true))).collect();
    pooled.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut doubled_rank_sum_b: u128 = 0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j < pooled.len() && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        // Ranks i+1..=j share the midrank (i+1+j)/2.
        let doubled_mid = (i + 1 + j) as u128;
        let in_b = pooled[i..j].iter().filter(|p| p.1).count() as u128;
        doubled_rank_sum_b += doubled_mid * in_b;
        i = j;
    }
    let nb = b.len() as u128;
    let doubled_u = doubled_rank_sum_b - nb * (nb + 1);
    Ok(from_doubled_u(doubled_u, a.len(), b.len()))
}

/// The two single-binding halves of a two-binding sum, in printed form.
pub fn split_two_bindings(expr: &str) -> Result<[String; 2]> {
    let s = structure_of(expr)?;
    let halves: Vec<String> = s.iter().map(|(p, sym)| print_expr(&crate::syntax::Expr::binding(sym.as_str(), p))).collect();
    match <[String; 2]>::try_from(halves) {
        Ok(h) if s.iter().all(|(p, _)| !p.is_empty()) => Ok(h),
        _ => Err(SuperpositionError::NotTwoBindings(expr.to_string())),
    }
}

/// `‖v(p:P + q:Q) − [v(p:P) + v(q:Q)]‖₂`.
pub fn additivity_gap(expr2: &str, src: &dyn VectorSource) -> Result<f64> {
    let [a, b] = split_two_bindings(expr2)?;
    let (whole, va, vb) = (src.vector(expr2)?, src.vector(&a)?, src.vector(&b)?);
    if va.len() != whole.len() || vb.len() != whole.len() {
        return Err(SuperpositionError::DimensionMismatch { expr: expr2.to_string(), got: va.len(), expected: whole.len() });
    }
    Ok(l2(whole.iter().zip(va.iter().zip(&vb)).map(|(w, (x, y))| w - (x + y))))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistBin {
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub count_shared: usize,
    pub count_disjoint: usize,
}

/// Equal-width bins over the pooled range; the last bin includes its upper edge.
pub fn histogram(shared: &NormSample, disjoint: &NormSample, bins: usize) -> Vec<HistBin> {
    let pooled = shared.norms.iter().chain(&disjoint.norms);
    let lo = pooled.clone().copied().fold(f64::INFINITY, f64::min);
    let mut hi = pooled.copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) || bins == 0 {
        return Vec::new();
    }
    if hi <= lo {
        hi = lo + 1.0;
    }
    let width = (hi - lo) / bins as f64;
    let mut out: Vec<HistBin> = (0..bins)
        .map(|k| HistBin {
            bin_lo: lo + k as f64 * width,
            bin_hi: if k + 1 == bins { hi } else { lo + (k + 1) as f64 * width },
            count_shared: 0,
            count_disjoint: 0,
        })
        .collect();
    let slot = |x: f64| (((x - lo) / width) as usize).min(bins - 1);
    for &x in &shared.norms {
        out[slot(x)].count_shared += 1;
    }
    for &x in &disjoint.norms {
        out[slot(x)].count_disjoint += 1;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub auc: f64,
    pub n_shared: usize,
    pub n_disjoint: usize,
    pub mean_shared: f64,
    pub median_shared: f64,
    pub mean_disjoint: f64,
    pub median_disjoint: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mean_additivity_gap: Option<f64>,
}

pub fn summarize(shared: &NormSample, disjoint: &NormSample) -> Result<Summary> {
    Ok(Summary {
        auc: auc(shared, disjoint)?,
        n_shared: shared.norms.len(),
        n_disjoint: disjoint.norms.len(),
        mean_shared: shared.mean(),
        median_shared: shared.median(),
        mean_disjoint: disjoint.mean(),
        median_disjoint: disjoint.median(),
        mean_additivity_gap: None,
    })
}

/// Writes `norms.csv`, `hist.csv` and `summary.json` into `dir`.
pub fn report(shared: &NormSample, disjoint: &NormSample, mean_gap: Option<f64>, dir: &Path) -> Result<Summary> {
    let mut summary = summarize(shared, disjoint)?;
    summary.mean_additivity_gap = mean_gap;
    fs::create_dir_all(dir)?;

    let mut norms = csv::Writer::from_path(dir.join("norms.csv"))?;
    norms.write_record(["kind", "norm"])?;
    for sample in [shared, disjoint] {
        for x in &sample.norms {
            norms.write_record([sample.kind.name(), &x.to_string()])?;
        }
    }
    norms.flush()?;

    let mut hist = csv::Writer::from_path(dir.join("hist.csv"))?;
    for bin in histogram(shared, disjoint, HISTOGRAM_BINS) {
        hist.serialize(bin)?;
    }
    hist.flush()?;

    let mut f = fs::File::create(dir.join("summary.json"))?;
    serde_json::to_writer_pretty(&mut f, &summary)?;
    f.write_all(b"\n")?;
    Ok(summary)
}
