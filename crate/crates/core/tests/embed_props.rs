use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use srep::datagen::random_structure;
use srep::hrr::{
    cconv, hrr_encode, hrr_query, make_hrr_codebook, HrrCodebookFile, PermuteMode, UnbindMode,
};
use srep::superposition::{gen_quadruples, lhs_norm, HrrSource, QuadKind, TprSource};
use srep::tpr::{make_codebook, tpr_decode, tpr_encode, tpr_query, CodebookFile, Scheme, DEFAULT_MISS_TOL};
use srep::{Role, RolePath, Structure, Symbol, Value};

fn vocab(ns: usize, nr: usize) -> (Vec<Symbol>, Vec<Role>) {
    let syms = (0..ns).map(|i| Symbol::new(format!("a{}", (b'a' + i as u8) as char))).collect();
    let roles = (0..nr).map(|i| Role::new(((b'A' + i as u8) as char).to_string())).collect();
    (syms, roles)
}

fn structure(seed: u64, syms: &[Symbol], roles: &[Role], max_bindings: usize, max_len: usize) -> Structure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_structure(&mut rng, syms, roles, max_bindings, max_len).expect("vocabulary is large enough")
}

/// Outer product `s ⊗ r1 ⊗ .. ⊗ rk`, row-major, outermost role on the last axis.
fn outer(s: &[f64], roles_inner_first: &[&[f64]]) -> Vec<f64> {
    let mut t = s.to_vec();
    for r in roles_inner_first {
        t = t.iter().flat_map(|a| r.iter().map(move |b| a * b)).collect();
    }
    t
}

fn cconv_naive(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    (0..n).map(|k| (0..n).map(|j| a[j] * b[(k + n - j) % n]).sum()).collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tpr_components_are_outer_products(seed in any::<u64>(), cb_seed in any::<u64>()) {
        let (syms, roles) = vocab(6, 4);
        let cb = make_codebook(&syms, &roles, 6, 4, Scheme::Gaussian, cb_seed).unwrap();
        let file: CodebookFile = cb.to_file();
        let s = structure(seed, &syms, &roles, 4, 3);
        let t = tpr_encode(&s, &cb).unwrap();
        for depth in 0..=3usize {
            let mut expect = vec![0.0; 6 * 4usize.pow(depth as u32)];
            for (path, sym) in s.iter().filter(|(p, _)| p.len() == depth) {
                let rs: Vec<&[f64]> = path.atoms().iter().map(|r| file.roles[r.as_str()].as_slice()).collect();
                for (e, x) in expect.iter_mut().zip(outer(&file.symbols[sym.as_str()], &rs)) {
                    *e += x;
                }
            }
            let got = t.component(depth).map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; expect.len()]);
            prop_assert!(max_diff(&got, &expect) < 1e-12);
        }
    }

    #[test]
    fn tpr_decode_and_queries_match_evaluator(seed in any::<u64>(), q in prop::collection::vec(0usize..4, 1..4)) {
        let (syms, roles) = vocab(8, 4);
        let cb = make_codebook(&syms, &roles, 8, 4, Scheme::Gaussian, seed ^ 1).unwrap();
        let s = structure(seed, &syms, &roles, 4, 3);
        let t = tpr_encode(&s, &cb).unwrap();
        prop_assert_eq!(tpr_decode(&t, &cb, 3, DEFAULT_MISS_TOL).unwrap(), Value::Struct(s.clone()));

        let path = RolePath::from_atoms(q.iter().map(|&i| roles[i].as_str()));
        let expect = Value::Struct(s.clone()).query(&path);
        let got = tpr_decode(&tpr_query(&t, &path, &cb).unwrap(), &cb, 3, DEFAULT_MISS_TOL).unwrap();
        prop_assert_eq!(got, expect);
    }

    #[test]
    fn tpr_is_additive(a in any::<u64>(), b in any::<u64>()) {
        let (syms, roles) = vocab(5, 3);
        let cb = make_codebook(&syms, &roles, 5, 3, Scheme::Orthogonal, 3).unwrap();
        let (x, y) = (structure(a, &syms, &roles, 2, 2), structure(b, &syms, &roles, 2, 2));
        if let Ok(u) = x.union(&y) {
            let mut sum = tpr_encode(&x, &cb).unwrap();
            sum.add_assign(&tpr_encode(&y, &cb).unwrap());
            prop_assert!(sum.max_abs_diff(&tpr_encode(&u, &cb).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn cconv_matches_naive_sum(v in prop::collection::vec(-2.0f64..2.0, 2..80)) {
        let n = v.len() / 2;
        let (a, b) = (&v[..n], &v[n..2 * n]);
        prop_assert!(max_diff(&cconv(a, b).unwrap(), &cconv_naive(a, b)) < 1e-9);
        prop_assert!(max_diff(&cconv(a, b).unwrap(), &cconv(b, a).unwrap()) < 1e-9);
    }

    #[test]
    fn hrr_encoding_matches_definition(seed in any::<u64>(), permuted in any::<bool>()) {
        let (syms, roles) = vocab(6, 4);
        let mode = if permuted { PermuteMode::Permuted } else { PermuteMode::Plain };
        let cb = make_hrr_codebook(&syms, &roles, 32, mode, seed).unwrap();
        let file: HrrCodebookFile = cb.to_file();
        let s = structure(seed, &syms, &roles, 3, 2);
        let mut expect = vec![0.0; 32];
        for (path, sym) in s.iter() {
            let mut v = file.symbols[sym.as_str()].clone();
            for r in path.atoms() {
                let p: Vec<f64> = if permuted { file.permutation.iter().map(|&i| v[i]).collect() } else { v.clone() };
                v = cconv_naive(&p, &file.roles[r.as_str()]);
            }
            for (e, x) in expect.iter_mut().zip(v) {
                *e += x;
            }
        }
        prop_assert!(max_diff(&hrr_encode(&s, &cb).unwrap().vec, &expect) < 1e-9);
    }

    #[test]
    fn shared_quadruples_cancel(seed in any::<u64>()) {
        let (syms, roles) = vocab(8, 8);
        let names: Vec<String> = syms.iter().map(|s| s.0.clone()).collect();
        let rnames: Vec<String> = roles.iter().map(|r| r.0.clone()).collect();
        let quads = gen_quadruples(QuadKind::Shared, 5, &names, &rnames, seed).unwrap();
        let tcb = make_codebook(&syms, &roles, 8, 8, Scheme::Gaussian, seed).unwrap();
        let hcb = make_hrr_codebook(&syms, &roles, 64, PermuteMode::Permuted, seed).unwrap();
        let (tsrc, hsrc) = (TprSource { codebook: &tcb, max_depth: 1 }, HrrSource { codebook: &hcb });
        for q in &quads {
            prop_assert!(lhs_norm(q, &tsrc).unwrap() <= 1e-9);
            prop_assert!(lhs_norm(q, &hsrc).unwrap() <= 1e-9);
        }
    }
}

#[test]
fn hrr_single_symbol_query_at_large_dimension() {
    let (syms, roles) = vocab(16, 8);
    let mut correct = 0;
    for seed in 0..100 {
        let cb = make_hrr_codebook(&syms, &roles, 1024, PermuteMode::Permuted, seed).unwrap();
        let s = structure(seed, &syms, &roles, 3, 2);
        let (path, sym) = s.iter().next().map(|(p, s)| (p.clone(), s.clone())).unwrap();
        let h = hrr_query(&hrr_encode(&s, &cb).unwrap(), &path, &cb, UnbindMode::Correlation).unwrap();
        if srep::hrr::cleanup(&h.vec, &cb, 0.25) == Some(sym) {
            correct += 1;
        }
    }
    assert!(correct >= 97, "{correct}/100");
}

#[test]
fn tpr_unbind_of_absent_role_is_miss() {
    let (syms, roles) = vocab(4, 3);
    let cb = make_codebook(&syms, &roles, 4, 3, Scheme::Gaussian, 0).unwrap();
    let s = Structure::from_bindings([(RolePath::from_atoms(["A"]), Symbol::new("aa"))]).unwrap();
    let t = tpr_query(&tpr_encode(&s, &cb).unwrap(), &RolePath::from_atoms(["B"]), &cb).unwrap();
    assert_eq!(tpr_decode(&t, &cb, 1, DEFAULT_MISS_TOL).unwrap(), Value::Miss);
}
