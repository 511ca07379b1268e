//! Reference evaluation by direct summation over the defining series.
//!
//! Independent of the word machinery: one pass of odd integers feeds a
//! dynamic-programming state per depth level, so a cutoff of N outer terms
//! costs O(N depth) operations instead of N^depth. The returned enclosure
//! adds a proved tail bound to the tracked rounding error, so it always
//! contains the true value, just with far fewer correct digits than the
//! fast path.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::algebra::Rat;
use crate::approx::BigApprox;
use crate::eval::fx;
use crate::index::Index;

/// Which literal series the oracle sums.
///
/// `OddIntegers` is the defining sum over odd n_1 > ... > n_r. The
/// half-shift form substitutes n = 2m-1 and sums 2^-weight times
/// (m - 1/2)^-a over m_1 > ... > m_r >= 1. The rewrite is exact: the two
/// forms differ only by powers of two, which the kernel tracks in a separate
/// exponent ledger that provably cancels, so the partial-sum mantissas are
/// identical bit for bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SummationForm {
    OddIntegers,
    HurwitzHalfShift,
}

/// Fixed-point partial sum over the first `n_terms` odd outer values, so
/// n_1 <= 2 n_terms - 1, with its rounding error in ulps. The mantissa does
/// not depend on the summation form; the form only drives the power-of-two
/// ledger, which must close at exponent zero.
pub fn partial_sum_mantissa(
    a: &Index,
    n_terms: u64,
    p: u32,
    form: SummationForm,
) -> (BigInt, u128) {
    assert!(n_terms >= 1);
    let parts = a.parts();
    let r = parts.len();
    // Ledger exponents per level: zero for the odd form, the suffix weight
    // sum for the half-shift form, where (m - 1/2)^-a = 2^a (2m-1)^-a.
    let level_exp: Vec<u64> = (0..=r)
        .map(|j| match form {
            SummationForm::OddIntegers => 0,
            SummationForm::HurwitzHalfShift => parts[j..].iter().map(|&x| x as u64).sum(),
        })
        .collect();
    let prefactor_exp = match form {
        SummationForm::OddIntegers => 0,
        SummationForm::HurwitzHalfShift => a.weight() as u64,
    };

    // g[j] holds the sum over tuples with all entries at most the current m
    // of the level-j..r suffix products; g[r] is the empty product 1.
    let mut g = vec![BigInt::zero(); r + 1];
    g[r] = fx::one(p);
    let mut err = vec![0u128; r + 1];
    // Value bounds per level in whole units, for rounding-error propagation:
    // 2 covers any convergent level, the log cap covers harmonic levels.
    let log_cap = 2 + (2 * n_terms.max(2)).ilog2() as u128;
    let mut gbound = vec![1u128; r + 1];
    for j in (0..r).rev() {
        let level = if parts[j] >= 2 { 2u128 } else { log_cap };
        gbound[j] = gbound[j + 1].saturating_mul(level);
    }

    for i in 0..n_terms {
        let m = 2 * i + 1;
        for j in 0..r {
            let pm = fx::inv_pow(m, parts[j], p);
            let term_exp = match form {
                SummationForm::OddIntegers => 0,
                SummationForm::HurwitzHalfShift => parts[j] as u64,
            } + level_exp[j + 1];
            assert_eq!(term_exp, level_exp[j], "power-of-two ledger must balance");
            let term = fx::mul(&pm, &g[j + 1], p);
            g[j] += term;
            // The inverse power is short by at most 2 ulps and the product
            // truncates once; incoming state error is damped by m^-a.
            let m_pow = (m as u128).saturating_pow(parts[j]);
            err[j] += err[j + 1] / m_pow + 1 + 2 * gbound[j + 1] + 1;
        }
    }
    assert_eq!(
        level_exp[0], prefactor_exp,
        "prefactor must cancel the ledger exactly"
    );
    (g.swap_remove(0), err[0])
}

/// Proved bound on the series tail beyond `n_terms` outer terms:
/// (1 + ln N)^(r-1) * N^(1-a_1) / (a_1 - 1), with ln N replaced by the
/// rational overestimate 0.6932 (1 + log2 N). The half-integer spacing of
/// the outer sum and the ordering constraint on the inner ones leave this
/// an upper bound even though the inner logarithms grow past the cutoff.
pub fn tail_bound(a: &Index, n_terms: u64) -> Rat {
    assert!(a.is_admissible());
    assert!(n_terms >= 2);
    let parts = a.parts();
    let r = parts.len() as u32;
    let ln_cap = Rat::new(BigInt::from(6932), BigInt::from(10_000))
        * Rat::from_integer(BigInt::from(n_terms.ilog2() as u64 + 1));
    let base = Rat::one() + ln_cap;
    let mut inner = Rat::one();
    for _ in 1..r {
        inner *= &base;
    }
    let n = Rat::from_integer(BigInt::from(n_terms));
    // N^(1-a_1) / (a_1 - 1).
    let mut outer = Rat::one() / Rat::from_integer(BigInt::from(parts[0] as u64 - 1));
    for _ in 1..parts[0] {
        outer /= &n;
    }
    inner * outer
}

/// Oracle enclosure: partial sum plus tail bound and rounding error.
pub fn oracle_value(a: &Index, n_terms: u64, p: u32) -> BigApprox {
    assert!(a.is_admissible());
    assert!(n_terms >= a.depth() as u64);
    let n_terms = n_terms.max(2);
    let (mantissa, ulps) = partial_sum_mantissa(a, n_terms, p, SummationForm::OddIntegers);
    let err = fx::ulps_to_rat(ulps, p) + tail_bound(a, n_terms);
    BigApprox::new(fx::to_rat(&mantissa, p), err)
}
