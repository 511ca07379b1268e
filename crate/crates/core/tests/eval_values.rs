//! Numeric evaluation: frozen reference digits, backend cross-checks,
//! enclosure discipline, determinism, and the disk cache.

use num_bigint::BigInt;
use num_traits::Signed;
use tforge_core::algebra::{Combo, Monomial, Rat};
use tforge_core::approx::{parse_decimal, pow10};
use tforge_core::eval::{Backend, EvalConfig, EvalError};
use tforge_core::index::Index;
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

#[test]
fn fifteen_digit_reference_values() {
    let ev = evaluator(15);
    let cases = [
        (vec![2u32], "1.233700550136170"),
        (vec![3], "1.051799790264645"),
    ];
    for (parts, want) in cases {
        let v = ev.eval_index(&ix(&parts)).unwrap();
        assert_eq!(v.to_decimal(15), want);
    }
    let log2 = ev.eval_atom(&tforge_core::algebra::Atom::Log2).unwrap();
    assert_eq!(log2.to_decimal(15), "0.693147180559945");
}

#[test]
fn depth_one_matches_pi_squared_over_eight() {
    // t(2) = sum over odd n of n^{-2} = pi^2/8.
    let pi = parse_decimal("3.1415926535897932384626433832795028841971693993751")
        .unwrap();
    let target = &pi * &pi / Rat::from_integer(BigInt::from(8));
    let v = evaluator(40).eval_index(&ix(&[2])).unwrap();
    // parse_decimal truncation of pi contributes ~1e-49 to the target.
    assert!((v.value.clone() - target).abs() < pow10(-38));
}

#[test]
fn backends_agree_on_all_admissible_indices_through_weight_six() {
    let fast = evaluator(30);
    let oracle = evaluator(30);
    for k in 2..=6u32 {
        for a in tforge_core::index::admissible_indices(k).unwrap() {
            let f = fast.eval_index(&a).unwrap();
            let o = oracle.eval_oracle(&a, 100_000).unwrap();
            assert!(f.agrees_with(&o), "disagreement at {a}");
            // The direct sum's tail bound is honest, so its interval must
            // catch the sharper fast value outright.
            assert!(o.contains(&f.value), "oracle interval misses {a}");
        }
    }
}

#[test]
fn oracle_tail_bound_encloses_refined_sums() {
    let ev = evaluator(30);
    for parts in [vec![2u32], vec![2, 1], vec![3, 1, 2], vec![2, 1, 1, 1]] {
        let a = ix(&parts);
        let coarse = ev.eval_oracle(&a, 500).unwrap();
        let fine = ev.eval_oracle(&a, 50_000).unwrap();
        assert!(coarse.contains(&fine.value), "tail bound too tight for {a}");
        assert!(fine.err_abs < coarse.err_abs);
    }
}

#[test]
fn intervals_narrow_but_stay_consistent_as_digits_grow() {
    for parts in [vec![2u32], vec![3, 2], vec![2, 1, 2], vec![2, 1, 1, 1, 1]] {
        let a = ix(&parts);
        let coarse = evaluator(25).eval_index(&a).unwrap();
        let fine = evaluator(35).eval_index(&a).unwrap();
        assert!(coarse.contains(&fine.value), "refinement left interval at {a}");
        assert!(fine.err_abs < coarse.err_abs);
    }
}

#[test]
fn canonical_error_bound_is_reported() {
    let v = evaluator(20).eval_index(&ix(&[2, 1])).unwrap();
    let exp = v.err_exponent().unwrap();
    assert!(exp <= -20, "err 1e{exp} misses the 20-digit request");
}

#[test]
fn repeated_runs_are_bit_identical() {
    for backend in [Backend::Fast, Backend::Oracle] {
        let cfg = EvalConfig {
            digits: 25,
            backend,
            oracle_cutoff: 20_000,
            ..EvalConfig::default()
        };
        let a = ix(&[2, 1, 2]);
        let first = Evaluator::new(cfg.clone()).unwrap().eval_index(&a).unwrap();
        let second = Evaluator::new(cfg).unwrap().eval_index(&a).unwrap();
        assert_eq!(first.to_decimal(27), second.to_decimal(27));
        assert_eq!(first.err_abs, second.err_abs);
    }
}

#[test]
fn stuffle_fact_holds_numerically() {
    let ev = evaluator(30);
    // t(2)t(3) - t(2,3) - t(3,2) - t(5) should vanish.
    let residual = Combo::term(
        Monomial::t_value(ix(&[2]))
            .unwrap()
            .times(&Monomial::t_value(ix(&[3])).unwrap()),
        Rat::from_integer(BigInt::from(1)),
    )
    .sub(&Combo::t_value(ix(&[2, 3])).unwrap())
    .sub(&Combo::t_value(ix(&[3, 2])).unwrap())
    .sub(&Combo::t_value(ix(&[5])).unwrap());
    let v = ev.eval_combo(&residual).unwrap();
    assert!(v.is_below(&pow10(-25)), "residual {}", v.to_decimal(32));
}

#[test]
fn usage_errors_are_reported_not_panicked() {
    let ev = evaluator(20);
    match ev.eval_index(&ix(&[1, 2])) {
        Err(EvalError::NotAdmissible(_)) => {}
        other => panic!("expected NotAdmissible, got {other:?}"),
    }
    match ev.eval_oracle(&ix(&[2, 1, 1]), 2) {
        Err(EvalError::CutoffBelowDepth { .. }) => {}
        other => panic!("expected CutoffBelowDepth, got {other:?}"),
    }
    assert!(Evaluator::new(EvalConfig {
        digits: 0,
        ..EvalConfig::default()
    })
    .is_err());
    assert!(Evaluator::new(EvalConfig {
        digits: 10_000,
        ..EvalConfig::default()
    })
    .is_err());
}

#[test]
fn zero_time_budget_fails_cleanly() {
    let ev = Evaluator::new(EvalConfig {
        digits: 30,
        time_budget: Some(std::time::Duration::ZERO),
        ..EvalConfig::default()
    })
    .unwrap();
    match ev.eval_index(&ix(&[3, 2])) {
        Err(EvalError::PrecisionUnreachable(_)) => {}
        other => panic!("expected PrecisionUnreachable, got {other:?}"),
    }
}

#[test]
fn disk_cache_round_trip_and_corruption_recovery() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = EvalConfig {
        digits: 25,
        cache_path: Some(dir.path().to_path_buf()),
        ..EvalConfig::default()
    };
    let targets = [ix(&[2]), ix(&[3, 2]), ix(&[2, 1, 2])];

    let cold = Evaluator::new(cfg.clone()).unwrap();
    let cold_values: Vec<_> = targets
        .iter()
        .map(|a| cold.eval_index(a).unwrap())
        .collect();
    assert!(cold.counters().backend_calls > 0);

    let warm = Evaluator::new(cfg.clone()).unwrap();
    for (a, cv) in targets.iter().zip(&cold_values) {
        let wv = warm.eval_index(a).unwrap();
        assert_eq!(wv.to_decimal(27), cv.to_decimal(27));
        assert_eq!(wv.err_abs, cv.err_abs);
    }
    let warm_counters = warm.counters();
    assert_eq!(warm_counters.backend_calls, 0, "warm run recomputed");
    assert_eq!(warm_counters.cache_hits_disk as usize, targets.len());

    // Damage every cache entry; evaluation should fall back to recomputing
    // and flag the corruption instead of failing.
    let mut damaged = 0;
    for entry in walk(dir.path()) {
        std::fs::write(&entry, b"{ not json").unwrap();
        damaged += 1;
    }
    assert!(damaged > 0, "no cache files were written");
    let repaired = Evaluator::new(cfg).unwrap();
    for (a, cv) in targets.iter().zip(&cold_values) {
        let rv = repaired.eval_index(a).unwrap();
        assert_eq!(rv.to_decimal(27), cv.to_decimal(27));
    }
    let repaired_counters = repaired.counters();
    assert!(repaired_counters.cache_errors > 0);
    assert!(repaired_counters.backend_calls > 0);
}

fn walk(root: &std::path::Path) -> Vec<std::path::PathBuf> {
    let mut files = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                files.push(path);
            }
        }
    }
    files
}
