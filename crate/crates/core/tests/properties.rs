//! Cross-module invariants for constraints, semstore and units.

use std::collections::BTreeSet;

use proptest::prelude::*;
use semdeg_core::constraints::{self, BinOp, Environment, Evaluator, Expr, Value};
use semdeg_core::semstore::{closure_of, KbError, KnowledgeBase};
use semdeg_core::units::{approx_eq, temperature_registry, Converter, ConverterRegistry, Quantity};

// ---- constraints ----

const OPS: [BinOp; 12] = [
    BinOp::Or,
    BinOp::And,
    BinOp::Lt,
    BinOp::Le,
    BinOp::Eq,
    BinOp::Ne,
    BinOp::Ge,
    BinOp::Gt,
    BinOp::Add,
    BinOp::Sub,
    BinOp::Mul,
    BinOp::Div,
];

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0u32..1000, 0u32..4).prop_map(|(n, d)| Expr::number(n as f64 / 10f64.powi(d as i32))),
        (0u32..100, prop::sample::select(vec!["Celsius", "Fahrenheit", "Kelvin"]))
            .prop_map(|(n, u)| Expr::quantity(n as f64, u)),
        any::<bool>().prop_map(Expr::Bool),
        prop::sample::select(vec!["a", "b", "Line.Temp", "Line.Limit", "flag", "missing.x"]).prop_map(Expr::path),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            inner.clone().prop_map(|e| Expr::Not(Box::new(e))),
            (prop::sample::select(OPS.to_vec()), inner.clone(), inner)
                .prop_map(|(op, l, r)| Expr::binary(op, l, r)),
        ]
    })
}

fn env() -> Environment {
    Environment::new()
        .with("a", Quantity::dimensionless(3.0))
        .with("b", Quantity::dimensionless(0.0))
        .with("Line.Temp", Quantity::new(77.0, "Fahrenheit"))
        .with("Line.Limit", Quantity::new(30.0, "Celsius"))
        .with("flag", true)
}

proptest! {
    #[test]
    fn print_then_parse_is_identity(e in expr()) {
        let text = e.to_string();
        prop_assert_eq!(constraints::parse(&text).unwrap(), e, "{}", text);
    }

    #[test]
    fn evaluation_is_total_and_bounded(e in expr()) {
        let reg = temperature_registry();
        let (result, visits) = Evaluator::new(&reg).evaluate_counted(&e, &env());
        prop_assert!(visits >= 1 && visits <= e.size(), "{} visits for size {}", visits, e.size());
        if let Ok(Value::Quantity(q)) = result {
            prop_assert!(!q.magnitude.is_nan());
        }
    }

    #[test]
    fn comparisons_agree_after_conversion(x in -200.0f64..400.0, y in -200.0f64..400.0) {
        let reg = temperature_registry();
        let ev = Evaluator::new(&reg);
        let e = Environment::new()
            .with("x", Quantity::new(x, "Fahrenheit"))
            .with("y", Quantity::new(y, "Celsius"));
        let y_in_f = ev.convert(&Quantity::new(y, "Celsius"), "Fahrenheit").unwrap().magnitude;
        let lt = ev.evaluate(&constraints::parse("x < y").unwrap(), &e).unwrap().as_bool().unwrap();
        let ge = ev.evaluate(&constraints::parse("x >= y").unwrap(), &e).unwrap().as_bool().unwrap();
        let gt = ev.evaluate(&constraints::parse("x > y").unwrap(), &e).unwrap().as_bool().unwrap();
        let le = ev.evaluate(&constraints::parse("x <= y").unwrap(), &e).unwrap().as_bool().unwrap();
        prop_assert_ne!(lt, ge);
        prop_assert_ne!(gt, le);
        prop_assert!(!(lt && gt));
        if !approx_eq(x, y_in_f) {
            prop_assert_eq!(lt, x < y_in_f);
        }
    }
}

// ---- semstore ----

fn warshall(n: usize, edges: &[(usize, usize)]) -> BTreeSet<(String, String)> {
    let mut m = vec![vec![false; n]; n];
    for &(a, b) in edges {
        m[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if m[i][k] && m[k][j] {
                    m[i][j] = true;
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    for (i, row) in m.iter().enumerate() {
        for (j, &hit) in row.iter().enumerate() {
            if hit {
                out.insert((format!("n{i}"), format!("n{j}")));
            }
        }
    }
    out
}

fn graph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (1usize..=8).prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n), 0..20)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn closure_matches_warshall((n, edges) in graph()) {
        let names: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
        let got = closure_of(edges.iter().map(|&(a, b)| (names[a].as_str(), names[b].as_str())));
        prop_assert_eq!(got, warshall(n, &edges));

        let mut kb = KnowledgeBase::new();
        for id in &names {
            kb.ensure_term(id).unwrap();
        }
        kb.ensure_term("next").unwrap();
        for &(a, b) in &edges {
            kb.add_triple(&names[a], "next", &names[b]).unwrap();
        }
        prop_assert_eq!(kb.transitive_closure("next").unwrap(), warshall(n, &edges));
    }

    #[test]
    fn taxonomy_stays_acyclic((n, edges) in graph()) {
        let mut kb = KnowledgeBase::new();
        let names: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
        for id in &names {
            kb.ensure_term(id).unwrap();
        }
        let mut accepted = Vec::new();
        for &(c, p) in &edges {
            match kb.add_taxonomy_edge(&names[c], &names[p]) {
                Ok(()) => accepted.push((c, p)),
                Err(KbError::CycleDetected { .. }) => {
                    // refused exactly when the parent already reaches the child
                    prop_assert!(c == p || kb.is_subtype(&names[p], &names[c]).unwrap());
                }
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
        prop_assert!(kb.check_integrity().is_ok());
        let closure = warshall(n, &accepted);
        prop_assert!(closure.iter().all(|(a, b)| a != b));
        for (a, b) in &closure {
            prop_assert!(kb.is_subtype(a, b).unwrap());
        }
    }
}

// ---- units ----

/// Every simple path from `s` to `t`, as id sequences.
fn all_paths(convs: &[Converter], s: &str, t: &str) -> Vec<Vec<String>> {
    fn go(convs: &[Converter], at: &str, t: &str, seen: &mut Vec<String>, path: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
        if at == t {
            out.push(path.clone());
            return;
        }
        for c in convs.iter().filter(|c| c.source == at) {
            if seen.contains(&c.target) {
                continue;
            }
            seen.push(c.target.clone());
            path.push(c.id.clone());
            go(convs, &c.target, t, seen, path, out);
            path.pop();
            seen.pop();
        }
    }
    let mut out = Vec::new();
    go(convs, s, t, &mut vec![s.to_string()], &mut Vec::new(), &mut out);
    out
}

fn registry() -> impl Strategy<Value = (Vec<Converter>, ConverterRegistry)> {
    prop::collection::vec((0usize..6, 0usize..6, 1u32..50, -20i32..20), 0..=10).prop_map(|edges| {
        let mut reg = ConverterRegistry::new();
        let mut convs = Vec::new();
        for u in 0..6 {
            reg.register_unit(&format!("U{u}"));
        }
        for (i, (s, t, scale, off)) in edges.into_iter().enumerate() {
            if s == t {
                continue;
            }
            let c = Converter::new(&format!("c{i:02}"), &format!("U{s}"), &format!("U{t}"), scale as f64 / 10.0, off as f64);
            reg.register_converter(c.clone()).unwrap();
            convs.push(c);
        }
        (convs, reg)
    })
}

proptest! {
    #[test]
    fn fahrenheit_round_trip(x in -1000.0f64..1000.0) {
        let reg = temperature_registry();
        let there = reg.find_chain("Fahrenheit", "Celsius").unwrap();
        let back = reg.find_chain("Celsius", "Fahrenheit").unwrap();
        let y = back.composed.apply(there.composed.apply(x));
        prop_assert!(approx_eq(x, y), "{} -> {}", x, y);
    }

    #[test]
    fn chain_is_minimal((convs, reg) in registry(), s in 0usize..6, t in 0usize..6) {
        let (s, t) = (format!("U{s}"), format!("U{t}"));
        let paths = all_paths(&convs, &s, &t);
        match reg.find_chain(&s, &t) {
            Ok(chain) => {
                let best = paths.iter().min_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b))).unwrap();
                let ids: Vec<String> = chain.ids().into_iter().map(str::to_string).collect();
                prop_assert_eq!(&ids, best);
                prop_assert!(approx_eq(chain.composed.apply(2.5), chain.apply_stepwise(2.5)));
            }
            Err(_) => prop_assert!(paths.is_empty()),
        }
    }
}
