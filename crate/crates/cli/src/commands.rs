use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use srep::datagen::{generate_dataset, read_jsonl, split_of, write_jsonl, Split};
use srep::eval::{eval, Value};
use srep::hrr::{
    capacity_sweep, hrr_decode, hrr_encode, hrr_query, make_hrr_codebook, write_sweep_csv, HrrCodebook, PermuteMode,
    UnbindMode,
};
use srep::superposition::{
    additivity_gap, battery_expressions, battery_norms, gen_quadruples, report, summarize, HrrSource, ImportedSource,
    QuadKind, Quadruple, TprSource, VectorSource,
};
use srep::syntax::{parse_str, print_expr, Expr, Role, RolePath, Symbol};
use srep::tpr::{make_codebook, tpr_decode, tpr_encode, tpr_query, Codebook};
use srep::vectors::{read_vectors, write_vectors, VectorRecord};
use srep::{eval_str, print_value, Structure};

use crate::config::{self, FileConfig};
use crate::{
    Cli, Command, EmbedArgs, EncodeArgs, Failure, GenArgs, ModeArg, QueryArgs, SchemeArg, SourceArg, SuperposeArgs,
    SweepArgs, UnbindArg,
};

type Res<T = ()> = Result<T, Failure>;

pub fn run(cli: Cli) -> Res {
    let cfg = config::load(cli.config.as_deref())?;
    let seed = cli.seed;
    match cli.command {
        Command::Parse { expr } => {
            let ast = parse_str(&expr)?;
            emit(&serde_json::to_string_pretty(&ast)?)?;
            Ok(())
        }
        Command::Eval { expr } => {
            let value = eval(&parse_str(&expr)?)?;
            emit(&print_value(&value))?;
            Ok(())
        }
        Command::Gen(args) => gen(&cfg, seed, args),
        Command::Check { dataset } => check(&dataset),
        Command::Encode(args) => encode(&cfg, seed.unwrap_or(0), args),
        Command::Query(args) => query(&cfg, seed.unwrap_or(0), args),
        Command::Superpose(args) => superpose(&cfg, seed.unwrap_or(0), args),
        Command::Sweep(args) => sweep(&cfg, seed, args),
    }
}

fn emit(text: &str) -> Res {
    let mut out = io::stdout().lock();
    writeln!(out, "{text}").and_then(|()| out.flush()).map_err(|e| Failure::Io(format!("stdout: {e}")))
}

fn create(path: &Path) -> Res<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn open(path: &Path) -> Res<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn output(path: Option<&Path>) -> Res<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn gen(cfg: &FileConfig, seed: Option<u64>, args: GenArgs) -> Res {
    let mut g = cfg.gen.clone();
    if let Some(s) = seed {
        g.seed = s;
    }
    if let Some(n) = args.num_pairs {
        g.num_pairs = n;
    }
    if let Some(d) = args.max_depth {
        g.max_nesting_depth = d;
    }
    if let Some(b) = args.max_bindings {
        g.max_bindings_per_sum = b;
    }
    if let Some(p) = args.max_path_len {
        g.max_path_len = p;
    }
    if let Some(f) = args.miss_frac {
        g.query_miss_fraction = Some(f);
    }
    let pairs = generate_dataset(&g)?;

    if args.split {
        let dir = args.out.expect("clap enforces --out with --split");
        fs::create_dir_all(&dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
        for split in [Split::Train, Split::Dev, Split::Test] {
            let part: Vec<_> = pairs.iter().filter(|p| split_of(&p.input) == split).cloned().collect();
            let path = dir.join(format!("{}.jsonl", split.name()));
            write_jsonl(&part, create(&path)?)?;
            eprintln!("{}: {} pairs", path.display(), part.len());
        }
        return Ok(());
    }
    write_jsonl(&pairs, output(args.out.as_deref())?)?;
    Ok(())
}

fn check(dataset: &Path) -> Res {
    let pairs = read_jsonl(open(dataset)?)?;
    let mut out = BufWriter::new(io::stdout().lock());
    let mut mismatches = 0usize;
    for (i, pair) in pairs.iter().enumerate() {
        let got = match eval_str(&pair.input) {
            Ok(v) => print_value(&v),
            Err(e) => format!("error: {e}"),
        };
        if got != pair.target {
            mismatches += 1;
            writeln!(out, "line {}: {} => {} (expected {})", i + 1, pair.input, got, pair.target)?;
        }
    }
    writeln!(out, "{} pairs, {} mismatches", pairs.len(), mismatches)?;
    out.flush()?;
    if mismatches > 0 {
        return Err(Failure::Domain(format!("{mismatches} mismatches in {}", dataset.display())));
    }
    Ok(())
}

fn collect_tokens(e: &Expr, syms: &mut BTreeSet<Symbol>, roles: &mut BTreeSet<Role>) {
    match e {
        Expr::Sym(s) => {
            syms.insert(s.clone());
        }
        Expr::Bind { child, role } => {
            roles.insert(role.clone());
            collect_tokens(child, syms, roles);
        }
        Expr::Sum { left, right } => {
            collect_tokens(left, syms, roles);
            collect_tokens(right, syms, roles);
        }
        Expr::Query { subject, path } => {
            roles.extend(path.atoms().iter().cloned());
            collect_tokens(subject, syms, roles);
        }
    }
}

enum Embedder {
    Tpr(Codebook),
    Hrr(HrrCodebook),
}

fn permute_mode(m: ModeArg) -> PermuteMode {
    match m {
        ModeArg::Plain => PermuteMode::Plain,
        ModeArg::Permuted => PermuteMode::Permuted,
    }
}

fn unbind_mode(u: UnbindArg) -> UnbindMode {
    match u {
        UnbindArg::Correlation => UnbindMode::Correlation,
        UnbindArg::SelfInverse => UnbindMode::SelfInverse,
    }
}

/// Codebook over exactly the tokens the expressions use, in sorted order.
fn embedder(cfg: &FileConfig, seed: u64, args: &EmbedArgs, exprs: &[Expr]) -> Res<Embedder> {
    let (mut syms, mut roles) = (BTreeSet::new(), BTreeSet::new());
    for e in exprs {
        collect_tokens(e, &mut syms, &mut roles);
    }
    let syms: Vec<Symbol> = syms.into_iter().collect();
    let roles: Vec<Role> = roles.into_iter().collect();
    let ec = &cfg.encode;
    let emb = match args.scheme {
        SchemeArg::Tpr => Embedder::Tpr(make_codebook(
            &syms,
            &roles,
            args.sym_dim.unwrap_or(ec.sym_dim),
            args.role_dim.unwrap_or(ec.role_dim),
            ec.tpr_scheme,
            seed,
        )?),
        SchemeArg::Hrr => Embedder::Hrr(make_hrr_codebook(
            &syms,
            &roles,
            args.hrr_dim.unwrap_or(ec.hrr_dim),
            args.mode.map(permute_mode).unwrap_or(ec.mode),
            seed,
        )?),
    };
    if let Some(path) = &args.codebook {
        let mut w = create(path)?;
        match &emb {
            Embedder::Tpr(cb) => serde_json::to_writer(&mut w, &cb.to_file())?,
            Embedder::Hrr(cb) => serde_json::to_writer(&mut w, &cb.to_file())?,
        }
        w.write_all(b"\n")?;
        w.flush()?;
    }
    Ok(emb)
}

fn structure_value(e: &Expr) -> Res<Structure> {
    match eval(e)? {
        Value::Struct(s) => Ok(s),
        Value::Miss => Err(Failure::Domain(format!("`{}` evaluates to $, which has no embedding", print_expr(e)))),
    }
}

fn encode(cfg: &FileConfig, seed: u64, args: EncodeArgs) -> Res {
    let texts = match &args.input {
        Some(path) => {
            let mut v = Vec::new();
            for line in open(path)?.lines() {
                let line = line?;
                if !line.trim().is_empty() {
                    v.push(line);
                }
            }
            v
        }
        None => args.exprs.clone(),
    };
    let exprs = texts.iter().map(|t| parse_str(t)).collect::<Result<Vec<_>, _>>()?;
    let structures = exprs.iter().map(structure_value).collect::<Res<Vec<_>>>()?;
    let emb = embedder(cfg, seed, &args.embed, &exprs)?;
    let max_depth = structures.iter().map(Structure::depth).max().unwrap_or(0);
    let mut records = Vec::with_capacity(exprs.len());
    for (e, s) in exprs.iter().zip(&structures) {
        let vector = match &emb {
            Embedder::Tpr(cb) => tpr_encode(s, cb)?.flatten(max_depth),
            Embedder::Hrr(cb) => hrr_encode(s, cb)?.vec,
        };
        records.push(VectorRecord { expr: print_expr(e), vector });
    }
    write_vectors(&records, output(args.out.as_deref())?)?;
    Ok(())
}

/// Splits `S ? p1 ? p2 ..` into `S` and its query paths, first applied first.
fn query_chain(e: &Expr) -> (&Expr, Vec<&RolePath>) {
    let mut paths = Vec::new();
    let mut cur = e;
    while let Expr::Query { subject, path } = cur {
        paths.push(path);
        cur = subject;
    }
    paths.reverse();
    (cur, paths)
}

#[derive(Serialize)]
struct QueryReport {
    expr: String,
    scheme: &'static str,
    decoded: String,
    oracle: String,
    #[serde(rename = "match")]
    matches: bool,
}

fn query(cfg: &FileConfig, seed: u64, args: QueryArgs) -> Res {
    let expr = parse_str(&args.expr)?;
    let oracle = eval(&expr)?;
    let (subject, paths) = query_chain(&expr);
    let s = structure_value(subject)?;
    let max_depth = s.depth();
    let decoded = match embedder(cfg, seed, &args.embed, std::slice::from_ref(&expr))? {
        Embedder::Tpr(cb) => {
            let mut t = tpr_encode(&s, &cb)?;
            for p in &paths {
                t = tpr_query(&t, p, &cb)?;
            }
            tpr_decode(&t, &cb, max_depth, cfg.encode.miss_tol)?
        }
        Embedder::Hrr(cb) => {
            let mode = args.unbind.map(unbind_mode).unwrap_or(cfg.encode.unbind);
            let mut h = hrr_encode(&s, &cb)?;
            for p in &paths {
                h = hrr_query(&h, p, &cb, mode)?;
            }
            hrr_decode(&h, &cb, max_depth, args.tau.unwrap_or(cfg.encode.tau), mode)?
        }
    };
    let rep = QueryReport {
        expr: print_expr(&expr),
        scheme: match args.embed.scheme {
            SchemeArg::Tpr => "tpr",
            SchemeArg::Hrr => "hrr",
        },
        decoded: print_value(&decoded),
        oracle: print_value(&oracle),
        matches: decoded == oracle,
    };
    emit(&serde_json::to_string(&rep)?)?;
    Ok(())
}

fn superpose(cfg: &FileConfig, seed: u64, args: SuperposeArgs) -> Res {
    let sc = &cfg.superpose;
    let n = args.quadruples.unwrap_or(sc.quadruples);
    let shared = gen_quadruples(QuadKind::Shared, n, &sc.symbols, &sc.roles, seed)?;
    let disjoint = gen_quadruples(QuadKind::Disjoint, n, &sc.symbols, &sc.roles, seed)?;

    if let Some(path) = &args.exprs_out {
        let mut w = create(path)?;
        for e in battery_expressions(&[shared.as_slice(), disjoint.as_slice()].concat()) {
            writeln!(w, "{e}")?;
        }
        w.flush()?;
        if args.source == SourceArg::File && args.vectors.is_none() {
            return Ok(());
        }
    }

    let syms: Vec<Symbol> = sc.symbols.iter().map(Symbol::new).collect();
    let roles: Vec<Role> = sc.roles.iter().map(Role::new).collect();
    let ec = &cfg.encode;
    let tpr_cb;
    let hrr_cb;
    let imported;
    let src: &dyn VectorSource = match args.source {
        SourceArg::Tpr => {
            let (sd, rd) = (args.sym_dim.unwrap_or(ec.sym_dim), args.role_dim.unwrap_or(ec.role_dim));
            tpr_cb = make_codebook(&syms, &roles, sd, rd, ec.tpr_scheme, seed)?;
            &TprSource { codebook: &tpr_cb, max_depth: sc.max_depth }
        }
        SourceArg::Hrr => {
            let mode = args.mode.map(permute_mode).unwrap_or(ec.mode);
            hrr_cb = make_hrr_codebook(&syms, &roles, args.hrr_dim.unwrap_or(ec.hrr_dim), mode, seed)?;
            &HrrSource { codebook: &hrr_cb }
        }
        SourceArg::File => {
            let path = args
                .vectors
                .as_deref()
                .ok_or_else(|| Failure::Domain("--source file needs --vectors".into()))?;
            imported = ImportedSource::new(read_vectors(open(path)?)?)?;
            &imported
        }
    };

    let s = battery_norms(QuadKind::Shared, &shared, src)?;
    let d = battery_norms(QuadKind::Disjoint, &disjoint, src)?;
    let gap = mean_gap(shared.iter().chain(&disjoint), src)?;
    let summary = match &args.out {
        Some(dir) => report(&s, &d, gap, dir)?,
        None => {
            let mut sum = summarize(&s, &d)?;
            sum.mean_additivity_gap = gap;
            sum
        }
    };
    emit(&serde_json::to_string_pretty(&summary)?)?;
    Ok(())
}

/// Mean additivity gap over every battery expression, or `None` when the
/// source lacks the single-binding halves.
fn mean_gap<'a>(quads: impl Iterator<Item = &'a Quadruple>, src: &dyn VectorSource) -> Res<Option<f64>> {
    use srep::error::SuperpositionError::MissingVector;
    let (mut total, mut count) = (0.0, 0usize);
    for q in quads {
        for e in q.exprs() {
            match additivity_gap(e, src) {
                Ok(g) => {
                    total += g;
                    count += 1;
                }
                Err(MissingVector(_)) => return Ok(None),
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok((count > 0).then(|| total / count as f64))
}

fn sweep(cfg: &FileConfig, seed: Option<u64>, args: SweepArgs) -> Res {
    let mut sc = cfg.sweep.clone();
    if let Some(s) = seed {
        sc.seed = s;
    }
    if let Some(t) = args.tau {
        sc.tau = t;
    }
    if let Some(m) = args.mode {
        sc.permute_mode = permute_mode(m);
    }
    if let Some(u) = args.unbind {
        sc.modes = vec![unbind_mode(u)];
    }
    if let Some(t) = args.trials {
        sc.trials = t;
    }
    if let Some(d) = args.dims {
        sc.dims = d;
    }
    let rows = capacity_sweep(&sc)?;
    write_sweep_csv(&rows, output(args.out.as_deref())?).map_err(srep::Error::from)?;
    Ok(())
}
