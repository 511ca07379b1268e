//! Acceptance gate: one test per release criterion, each printing a single
//! pass line. Budgets are wall-clock upper bounds; the combinatorial checks
//! are exact, the numeric ones are residual- and interval-based.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use tforge_core::algebra::{rat, rat_int, Combo, Monomial, Rat};
use tforge_core::approx::pow10;
use tforge_core::eval::EvalConfig;
use tforge_core::index::{
    admissible_indices, compositions, conjectural_basis, is_polar, Hyperplane, Index,
};
use tforge_core::relations::{
    express_in_basis, find_integer_relation, independence_scan, paper_relations,
    weight5_walkthrough, ExpressOutcome,
};
use tforge_core::Evaluator;

fn ix(parts: &[u32]) -> Index {
    Index::new(parts.to_vec()).unwrap()
}

fn evaluator(digits: u32) -> Evaluator {
    Evaluator::new(EvalConfig {
        digits,
        ..EvalConfig::default()
    })
    .unwrap()
}

fn combo(terms: &[(&str, Rat)]) -> Combo {
    let mut c = Combo::zero();
    for (key, q) in terms {
        c.add_term(Monomial::parse_key(key).unwrap(), q.clone());
    }
    c
}

fn report(name: &str, started: Instant, budget: Option<Duration>) {
    let elapsed = started.elapsed();
    if let Some(b) = budget {
        assert!(elapsed < b, "{name} took {elapsed:?}, budget {b:?}");
    }
    println!("ACCEPTANCE {name}: pass ({elapsed:?})");
}

#[test]
fn enumeration_exactness() {
    let t0 = Instant::now();
    let listed: [&[&[u32]]; 3] = [
        &[&[2, 1], &[3]],
        &[&[2, 1, 1], &[2, 2], &[3, 1]],
        &[&[2, 1, 1, 1], &[2, 1, 2], &[2, 2, 1], &[3, 1, 1], &[3, 2]],
    ];
    for (k, want) in (3u32..=5).zip(listed) {
        let got = conjectural_basis(k).unwrap();
        let want: Vec<Index> = want.iter().map(|p| ix(p)).collect();
        assert_eq!(got, want, "C_{k} differs in content or order");
    }
    report("enumeration_exactness", t0, Some(Duration::from_secs(1)));
}

#[test]
fn counting() {
    let t0 = Instant::now();
    let mut f = [0u64; 21];
    f[2] = 1;
    f[3] = 2;
    for k in 4..=20 {
        f[k] = f[k - 1] + f[k - 2];
    }
    let mut d = [0u64; 21];
    d[2] = 1;
    d[3] = 1;
    d[4] = 1;
    for k in 5..=20 {
        d[k] = d[k - 2] + d[k - 3];
    }
    for k in 2..=20u32 {
        assert_eq!(
            conjectural_basis(k).unwrap().len() as u64,
            f[k as usize],
            "|C_{k}|"
        );
        assert_eq!(
            compositions(k, &[2, 3]).unwrap().len() as u64,
            d[k as usize],
            "d_{k}"
        );
    }
    report("counting", t0, Some(Duration::from_secs(1)));
}

#[test]
fn polar_classifier() {
    let t0 = Instant::now();
    for r in 1..=4u32 {
        for i in 1..=r {
            for k in 0..=10u32 {
                let expected = match i {
                    1 => k == 0,
                    2 => k == 1 || k % 2 == 0,
                    _ => true,
                };
                let got = is_polar(r, Hyperplane::new(i, k).unwrap()).unwrap();
                assert_eq!(got, expected, "H_({i},{k}) at depth {r}");
            }
        }
    }
    for k in [3u32, 5, 7, 9] {
        assert!(!is_polar(2, Hyperplane::new(2, k).unwrap()).unwrap());
    }
    report("polar_classifier", t0, Some(Duration::from_secs(1)));
}

#[test]
fn stuffle_fact() {
    let t0 = Instant::now();
    let ev = evaluator(50);
    let residual = Combo::term(
        Monomial::t_value(ix(&[2]))
            .unwrap()
            .times(&Monomial::t_value(ix(&[3])).unwrap()),
        rat_int(1),
    )
    .sub(&Combo::t_value(ix(&[2, 3])).unwrap())
    .sub(&Combo::t_value(ix(&[3, 2])).unwrap())
    .sub(&Combo::t_value(ix(&[5])).unwrap());
    let v = ev.eval_combo(&residual).unwrap();
    assert!(
        v.is_below(&pow10(-40)),
        "stuffle fact residual {}",
        v.to_decimal(55)
    );
    report("stuffle_fact", t0, Some(Duration::from_secs(300)));
}

#[test]
fn shipped_relation_residuals() {
    let t0 = Instant::now();
    let ev = evaluator(50);
    let rels = paper_relations();
    assert_eq!(rels.len(), 4);
    for r in &rels {
        let v = ev.eval_combo(&r.combo).unwrap();
        assert!(
            v.is_below(&pow10(-40)),
            "{} residual {}",
            r.source,
            v.to_decimal(55)
        );
    }
    report("shipped_relation_residuals", t0, Some(Duration::from_secs(600)));
}

#[test]
fn weight5_walkthrough_criterion() {
    let t0 = Instant::now();
    let w = weight5_walkthrough(&evaluator(50)).unwrap();
    assert!(w.passed, "walkthrough failed: {:?}", w.steps);
    assert_ne!(w.determinant, rat_int(0));
    assert_eq!(w.determinant, rat(-1, 8));
    let expected = [
        combo(&[
            ("t(5)", rat_int(1)),
            ("t(3,2)", rat_int(-7)),
            ("t(2,1,2)", rat_int(-6)),
        ]),
        combo(&[
            ("t(2,3)", rat_int(1)),
            ("t(3,2)", rat(-5, 2)),
            ("t(2,1,2)", rat_int(-1)),
        ]),
        combo(&[
            ("t(4,1)", rat_int(1)),
            ("t(3,2)", rat(-1, 2)),
            ("t(2,1,2)", rat_int(1)),
            ("t(2,2,1)", rat_int(-4)),
        ]),
    ];
    assert_eq!(w.in_basis.len(), expected.len());
    for (r, want) in w.in_basis.iter().zip(&expected) {
        // Symbolic recheck: the difference must cancel to the zero combo.
        assert!(r.combo.sub(want).is_zero(), "derived {} != expected", r.combo);
    }
    for c in &w.checks {
        assert!(c.passed, "{} residual {}", c.name, c.residual.to_decimal(55));
        assert!(c.residual.abs_upper() < pow10(-40));
    }
    report("weight5_walkthrough", t0, None);
}

#[test]
fn relation_rediscovery() {
    let t0 = Instant::now();
    let ev = evaluator(60);
    let t32 = ev.eval_index(&ix(&[3, 2])).unwrap();
    let t5 = ev.eval_index(&ix(&[5])).unwrap();

    let labels: Vec<String> = ["t(3,2)", "t(5)", "t(2,3)"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let values = vec![t32.clone(), t5.clone(), ev.eval_index(&ix(&[2, 3])).unwrap()];
    let rel = find_integer_relation(&labels, &values, 60, 1_000_000)
        .unwrap()
        .expect("depth reduction of t(5) not found");
    assert_eq!(
        rel.coeffs,
        [8, 1, -6].map(BigInt::from).to_vec(),
        "unexpected coefficients"
    );

    let product = Combo::term(
        Monomial::t_value(ix(&[2]))
            .unwrap()
            .times(&Monomial::t_value(ix(&[3])).unwrap()),
        rat_int(1),
    );
    let labels: Vec<String> = ["t(3,2)", "t(5)", "t(2)*t(3)"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let values = vec![t32, t5, ev.eval_combo(&product).unwrap()];
    let rel = find_integer_relation(&labels, &values, 60, 1_000_000)
        .unwrap()
        .expect("product form not found");
    assert_eq!(rel.coeffs, [14, 7, -6].map(BigInt::from).to_vec());
    report("relation_rediscovery", t0, Some(Duration::from_secs(300)));
}

#[test]
fn spanning_scan() {
    let t0 = Instant::now();
    let ev = evaluator(60);
    for k in 3..=6u32 {
        for a in admissible_indices(k).unwrap() {
            match express_in_basis(&ev, &a, k, 1_000_000).unwrap() {
                ExpressOutcome::Expressed(e) => {
                    if let Some(cert) = &e.certificate {
                        assert!(
                            cert.residual.abs_upper() < pow10(-45),
                            "{a} residual {}",
                            cert.residual.to_decimal(65)
                        );
                    }
                }
                other => panic!("{a} not expressed: {other:?}"),
            }
        }
    }
    report("spanning_scan", t0, Some(Duration::from_secs(1800)));
}

#[test]
fn independence_scan_negative_control() {
    let t0 = Instant::now();
    let ev = evaluator(60);
    for k in 3..=6u32 {
        let report = independence_scan(&ev, k, 1_000_000).unwrap();
        assert!(
            report.relation.is_none(),
            "unexpected relation among C_{k}: {:?}",
            report.relation
        );
    }
    report("independence_scan", t0, None);
}

#[test]
fn backend_agreement() {
    let t0 = Instant::now();
    let ev = evaluator(50);
    for k in 2..=5u32 {
        for a in admissible_indices(k).unwrap() {
            let fast = ev.eval_index(&a).unwrap();
            let oracle = ev.eval_oracle(&a, 100_000).unwrap();
            assert!(
                fast.agrees_with(&oracle),
                "backends disagree at {a}: fast {} oracle {}",
                fast.to_decimal(55),
                oracle.to_decimal(55)
            );
        }
    }
    report("backend_agreement", t0, Some(Duration::from_secs(600)));
}

#[test]
fn enclosure_property() {
    let t0 = Instant::now();
    // Deterministic selection: a fixed linear congruential generator
    // shuffles the (index, digits) pool, and the first 100 picks rerun at
    // ten more digits.
    let mut pool = Vec::new();
    for k in 2..=6u32 {
        for a in admissible_indices(k).unwrap() {
            for digits in [20u32, 30, 40, 50] {
                pool.push((a.clone(), digits));
            }
        }
    }
    assert!(pool.len() >= 100);
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut next = move || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        state
    };
    for i in (1..pool.len()).rev() {
        let j = (next() % (i as u64 + 1)) as usize;
        pool.swap(i, j);
    }

    let mut evaluators: std::collections::BTreeMap<u32, Evaluator> = Default::default();
    for (a, digits) in pool.into_iter().take(100) {
        let original = evaluators
            .entry(digits)
            .or_insert_with(|| evaluator(digits))
            .eval_index(&a)
            .unwrap();
        let refined = evaluators
            .entry(digits + 10)
            .or_insert_with(|| evaluator(digits + 10))
            .eval_index(&a)
            .unwrap();
        assert!(
            original.contains(&refined.value),
            "{a} at {digits} digits does not enclose the refinement"
        );
    }
    report("enclosure_property", t0, None);
}
