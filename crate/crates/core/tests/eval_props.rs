mod common;

use common::{library_eval, oracle_eval, Outcome};
use proptest::prelude::*;
use srep::syntax::{parse_str, print_expr};
use srep::{eval, eval_str, Value};

#[derive(Debug, Clone)]
enum T {
    Sym(&'static str),
    Bind(Box<T>, &'static str),
    Sum(Box<T>, Box<T>),
    Query(Box<T>, Vec<&'static str>),
}

fn tree() -> impl Strategy<Value = T> {
    let leaf = prop::sample::select(vec!["aa", "bb", "cc", "q", "zz"]).prop_map(T::Sym);
    let role = || prop::sample::select(vec!["A", "B", "C", "L", "R"]);
    leaf.prop_recursive(5, 40, 3, move |inner| {
        prop_oneof![
            (inner.clone(), role()).prop_map(|(t, r)| T::Bind(Box::new(t), r)),
            (inner.clone(), role()).prop_map(|(t, r)| T::Bind(Box::new(t), r)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| T::Sum(Box::new(a), Box::new(b))),
            (inner, prop::collection::vec(role(), 1..3)).prop_map(|(t, p)| T::Query(Box::new(t), p)),
        ]
    })
}

/// Fully parenthesized rendering: unambiguous whatever the precedence rules.
fn full(t: &T) -> String {
    match t {
        T::Sym(s) => s.to_string(),
        T::Bind(c, r) => format!("({}):{r}", full(c)),
        T::Sum(a, b) => format!("({}) + ({})", full(a), full(b)),
        T::Query(c, p) => format!("({}) ? {}", full(c), p.join(":")),
    }
}

/// Parenthesis-free rendering: usually a different (or invalid) parse, which
/// both evaluators must agree on anyway.
fn bare(t: &T) -> String {
    match t {
        T::Sym(s) => s.to_string(),
        T::Bind(c, r) => format!("{}:{r}", bare(c)),
        T::Sum(a, b) => format!("{}+{}", bare(a), bare(b)),
        T::Query(c, p) => format!("{} ?{}", bare(c), p.join(":")),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn agrees_with_second_evaluator(t in tree()) {
        let text = full(&t);
        prop_assert_eq!(library_eval(&text), oracle_eval(&text), "{}", text);
        let text = bare(&t);
        prop_assert_eq!(library_eval(&text), oracle_eval(&text), "{}", text);
    }

    #[test]
    fn printing_round_trips(t in tree()) {
        let e = parse_str(&full(&t)).unwrap();
        let printed = print_expr(&e);
        prop_assert_eq!(&parse_str(&printed).unwrap(), &e);
        prop_assert_eq!(print_expr(&parse_str(&printed).unwrap()), printed);
    }

    #[test]
    fn bind_then_unbind_is_identity(t in tree(), r in prop::sample::select(vec!["A", "B", "X"])) {
        let text = full(&t);
        if let Ok(Value::Struct(s)) = eval_str(&text) {
            let round = eval_str(&format!("({text}):{r} ? {r}")).unwrap();
            prop_assert_eq!(round, Value::Struct(s));
        }
    }

    #[test]
    fn sums_commute_as_values(a in tree(), b in tree()) {
        let (x, y) = (full(&a), full(&b));
        let ab = eval_str(&format!("({x}) + ({y})"));
        let ba = eval_str(&format!("({y}) + ({x})"));
        match (ab, ba) {
            (Ok(u), Ok(v)) => prop_assert_eq!(u, v),
            (Err(_), Err(_)) => {}
            (u, v) => prop_assert!(false, "{:?} vs {:?}", u, v),
        }
    }

    #[test]
    fn miss_absorbs_further_operations(t in tree(), r in prop::sample::select(vec!["A", "B"])) {
        let text = full(&t);
        if let Ok(v) = eval_str(&text) {
            if !v.is_miss() {
                return Ok(());
            }
            let bound = format!("({text}):{r}");
            let queried = format!("({text}) ? {r}");
            let summed = format!("({text}) + zz:X");
            prop_assert!(eval_str(&bound).unwrap().is_miss());
            prop_assert!(eval_str(&queried).unwrap().is_miss());
            prop_assert!(eval_str(&summed).is_err());
        }
    }

    #[test]
    fn queries_shrink_depth(t in tree(), r in prop::sample::select(vec!["A", "B", "C", "L", "R"])) {
        let e = parse_str(&full(&t)).unwrap();
        if let Ok(Value::Struct(s)) = eval(&e) {
            if let Value::Struct(sub) = s.unbind_one(&srep::Role::new(r)) {
                prop_assert!(sub.depth() < s.depth());
                prop_assert!(sub.len() <= s.len());
            }
        }
    }
}

#[test]
fn oracle_spot_checks() {
    let v = |s: &str| oracle_eval(s);
    assert_eq!(v("qf:N ? N"), Outcome::Value("qf".into()));
    assert_eq!(v("qf:N ? X"), Outcome::Value("$".into()));
    assert_eq!(v("a:L + b:L:R + c:R:R ? R"), Outcome::Value("b:L + c:R".into()));
    assert_eq!(v("qf:"), Outcome::SyntaxError);
    assert_eq!(v("aa:A + bb:B:A"), Outcome::EvalError);
    assert_eq!(library_eval("aa:A + bb:B:A"), Outcome::EvalError);
    assert_eq!(v("aa:A + aa:A:B"), Outcome::Value("aa:A + aa:A:B".into()));
    assert_eq!(v("(aa:A + aa:A) ? A ?"), Outcome::SyntaxError);
    assert_eq!(v("aa ? A + bb"), Outcome::SyntaxError);
    assert_eq!(library_eval("aa ? A + bb"), Outcome::SyntaxError);
}
