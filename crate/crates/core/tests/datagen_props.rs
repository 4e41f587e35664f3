mod common;

use std::collections::HashMap;

use common::{oracle_eval, Outcome};
use proptest::prelude::*;
use srep::datagen::{generate_dataset, read_jsonl, split_of, write_jsonl, GenConfig, PairType, Split, TypeMix};

fn small(seed: u64, n: usize) -> GenConfig {
    GenConfig { seed, num_pairs: n, ..GenConfig::default() }
}

#[test]
fn pairs_verify_against_second_evaluator() {
    let pairs = generate_dataset(&small(11, 5000)).unwrap();
    for p in &pairs {
        assert_eq!(oracle_eval(&p.input), Outcome::Value(p.target.clone()), "{}", p.input);
        assert_eq!(p.target == "$", p.type_tag == PairType::UnbindMiss, "{}", p.input);
    }
}

#[test]
fn every_category_appears_and_miss_fraction_is_close() {
    let pairs = generate_dataset(&small(5, 20_000)).unwrap();
    let mut counts: HashMap<PairType, usize> = HashMap::new();
    for p in &pairs {
        *counts.entry(p.type_tag).or_default() += 1;
    }
    for t in PairType::ALL {
        assert!(counts.get(&t).copied().unwrap_or(0) > 500, "{t}: {counts:?}");
    }
    // Two of five equal parts are queries; a tenth of those miss.
    let queries = counts[&PairType::Unbind] + counts[&PairType::UnbindMiss];
    let frac = counts[&PairType::UnbindMiss] as f64 / queries as f64;
    assert!((frac - 0.1).abs() < 0.02, "{frac}");
}

#[test]
fn inputs_are_unique_and_prefix_stable() {
    let a = generate_dataset(&small(2, 3000)).unwrap();
    let b = generate_dataset(&small(2, 700)).unwrap();
    assert_eq!(&a[..700], &b[..]);
    let mut inputs: Vec<&str> = a.iter().map(|p| p.input.as_str()).collect();
    inputs.sort_unstable();
    inputs.dedup();
    assert_eq!(inputs.len(), a.len());
}

#[test]
fn single_category_mix() {
    for t in PairType::ALL {
        let cfg = GenConfig { type_mix: TypeMix::only(t), query_miss_fraction: None, ..small(4, 300) };
        let pairs = generate_dataset(&cfg).unwrap();
        assert!(pairs.iter().all(|p| p.type_tag == t), "{t}");
    }
}

#[test]
fn jsonl_round_trip_is_byte_stable() {
    let pairs = generate_dataset(&small(8, 500)).unwrap();
    let mut buf = Vec::new();
    write_jsonl(&pairs, &mut buf).unwrap();
    let back = read_jsonl(buf.as_slice()).unwrap();
    assert_eq!(back, pairs);
    let mut again = Vec::new();
    write_jsonl(&back, &mut again).unwrap();
    assert_eq!(buf, again);
    let first = String::from_utf8(buf).unwrap().lines().next().unwrap().to_string();
    let v: serde_json::Value = serde_json::from_str(&first).unwrap();
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["input", "target", "type"]);
}

#[test]
fn malformed_jsonl_reports_line() {
    let text = "{\"input\":\"qf\",\"target\":\"qf\",\"type\":\"binding\"}\nnot json\n";
    let err = read_jsonl(text.as_bytes()).unwrap_err();
    assert!(err.to_string().starts_with("line 2"), "{err}");
}

#[test]
fn split_proportions() {
    let pairs = generate_dataset(&small(9, 20_000)).unwrap();
    let train = pairs.iter().filter(|p| split_of(&p.input) == Split::Train).count() as f64 / 20_000.0;
    let dev = pairs.iter().filter(|p| split_of(&p.input) == Split::Dev).count() as f64 / 20_000.0;
    assert!((train - 0.9).abs() < 0.01, "{train}");
    assert!((dev - 0.05).abs() < 0.01, "{dev}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn any_seed_is_sound_and_reproducible(seed in any::<u64>(), bindings in 1usize..5, depth in 1usize..5, chain in 1usize..5) {
        let cfg = GenConfig {
            seed,
            num_pairs: 200,
            max_bindings_per_sum: bindings,
            max_nesting_depth: depth,
            max_chained_queries: chain,
            ..GenConfig::default()
        };
        let a = generate_dataset(&cfg).unwrap();
        prop_assert_eq!(&a, &generate_dataset(&cfg).unwrap());
        for p in &a {
            prop_assert_eq!(oracle_eval(&p.input), Outcome::Value(p.target.clone()));
        }
    }
}
