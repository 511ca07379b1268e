//! Independent scalar constants: zeta at integer arguments by Euler-Maclaurin
//! with exact Bernoulli coefficients, log 2 by its binary series, and pi by
//! Machin's formula for use as a cross-check oracle.

use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::algebra::Rat;
use crate::approx::{ceil_log10, BigApprox};
use crate::eval::fx;
use crate::eval::EvalError;

/// Working mantissa bits for an absolute error target, with generous slack.
pub fn guard_bits(target: &Rat) -> u32 {
    let e = ceil_log10(target);
    let decimal = if e < 0 { (-e) as u32 } else { 0 };
    // 10/3 over-approximates log2(10).
    decimal * 10 / 3 + 64
}

static BERNOULLI: OnceLock<Mutex<Vec<Rat>>> = OnceLock::new();

/// B_0..B_n inclusive (B_1 = -1/2), extended on demand and cached.
pub fn bernoulli(n: usize) -> Vec<Rat> {
    let mut cache = bernoulli_cache(n);
    cache.truncate(n + 1);
    cache
}

/// B_n alone, without cloning the whole prefix.
pub fn bernoulli_single(n: usize) -> Rat {
    let cell = bernoulli_cell();
    let mut cache = cell.lock().expect("bernoulli cache poisoned");
    extend_bernoulli(&mut cache, n);
    cache[n].clone()
}

fn bernoulli_cell() -> &'static Mutex<Vec<Rat>> {
    BERNOULLI.get_or_init(|| Mutex::new(vec![Rat::one()]))
}

fn bernoulli_cache(n: usize) -> Vec<Rat> {
    let cell = bernoulli_cell();
    let mut cache = cell.lock().expect("bernoulli cache poisoned");
    extend_bernoulli(&mut cache, n);
    cache.clone()
}

fn extend_bernoulli(cache: &mut Vec<Rat>, n: usize) {
    while cache.len() <= n {
        let m = cache.len();
        // sum_{j<m} C(m+1, j) B_j = -C(m+1, m) B_m for m >= 1.
        let mut acc = Rat::zero();
        let mut binom = BigInt::one();
        for (j, b) in cache.iter().enumerate() {
            acc += Rat::from_integer(binom.clone()) * b;
            // C(m+1, j+1) from C(m+1, j).
            binom = binom * BigInt::from((m + 1 - j) as u64) / BigInt::from((j + 1) as u64);
        }
        let coeff = Rat::from_integer(BigInt::from((m + 1) as u64));
        let next = -acc / coeff;
        cache.push(next);
    }
}

/// zeta(s) for integer s >= 2 with err_abs <= target.
///
/// N-term partial sum in fixed point plus the Euler-Maclaurin correction
/// computed in exact rationals; the remainder is bounded by the first
/// omitted term, which is valid because x^-s is completely monotone.
pub fn zeta(s: u32, target: &Rat) -> Result<BigApprox, EvalError> {
    assert!(s >= 2, "zeta pole and divergent region are out of scope");
    if target.is_zero() || target.is_negative() {
        return Err(EvalError::PrecisionUnreachable("zeta target must be positive".into()));
    }
    let p = guard_bits(target);
    let quarter_target = target / Rat::from_integer(BigInt::from(4));
    let mut n: u64 = 16;
    for _attempt in 0..24 {
        if let Some((terms, remainder)) = em_tail(s, n, &quarter_target) {
            return Ok(finish_zeta(s, n, p, terms, remainder));
        }
        n *= 2;
    }
    Err(EvalError::PrecisionUnreachable(format!(
        "euler-maclaurin tail for zeta({s}) did not reach the target"
    )))
}

/// The correction terms at cutoff n, newest last, if they decrease
/// monotonically until one falls below the target; None asks for a larger n.
fn em_tail(s: u32, n: u64, target: &Rat) -> Option<(Vec<Rat>, Rat)> {
    let max_j = 240;
    let n_rat = Rat::from_integer(BigInt::from(n));
    let mut terms = Vec::new();
    let mut rising = Rat::from_integer(BigInt::from(s));
    let mut factorial = Rat::from_integer(BigInt::from(2));
    // n^{-(s+1)} to start; each step divides by n^2 exactly.
    let mut npow = Rat::one() / pow_rat(&n_rat, s + 1);
    let mut last_mag: Option<Rat> = None;
    for j in 1..=max_j {
        // B_{2j}/(2j)! * s(s+1)...(s+2j-2) * n^{-(s+2j-1)}
        let term = bernoulli_single(2 * j) / &factorial * &rising * &npow;
        let mag = term.abs();
        if let Some(prev) = &last_mag {
            if mag > *prev {
                return None;
            }
        }
        let below = mag < *target;
        terms.push(term);
        last_mag = Some(mag.clone());
        if below {
            // Remainder is bounded by the first omitted term; the last
            // computed term bounds it from above on the monotone run.
            terms.pop();
            return Some((terms, mag));
        }
        for step in 0..2u32 {
            let f = 2 * j as u32 + 1 + step;
            factorial *= Rat::from_integer(BigInt::from(f));
            rising *= Rat::from_integer(BigInt::from(s + 2 * j as u32 - 1 + step));
        }
        npow /= &n_rat * &n_rat;
    }
    None
}

fn pow_rat(x: &Rat, e: u32) -> Rat {
    let mut out = Rat::one();
    for _ in 0..e {
        out *= x;
    }
    out
}

fn finish_zeta(s: u32, n: u64, p: u32, terms: Vec<Rat>, remainder: Rat) -> BigApprox {
    // Partial sum in fixed point: each n^{-s} costs at most 2 ulps.
    let mut acc = BigInt::zero();
    for k in 1..n {
        acc += fx::inv_pow(k, s, p);
    }
    let rounding = fx::ulps_to_rat(2 * (n as u128), p);
    let n_rat = Rat::from_integer(BigInt::from(n));
    // n^{1-s}/(s-1) + n^{-s}/2 and the correction terms, all exact.
    let mut exact = Rat::one() / (pow_rat(&n_rat, s - 1) * Rat::from_integer(BigInt::from(s - 1)))
        + Rat::one() / (pow_rat(&n_rat, s) * Rat::from_integer(BigInt::from(2)));
    for t in terms {
        exact += t;
    }
    let value = fx::to_rat(&acc, p) + exact;
    BigApprox::new(value, rounding + remainder)
}

/// log 2 = sum_{k>=1} 1/(k 2^k) with err_abs <= target.
pub fn log2(target: &Rat) -> BigApprox {
    let p = guard_bits(target);
    let kmax = p;
    let mut acc = BigInt::zero();
    for k in 1..=kmax {
        // trunc(2^(p-k)/k), under one ulp each.
        acc += (BigInt::one() << (p - k)) / BigInt::from(k);
    }
    // Tail sum_{k>kmax} 2^-k / k < 2^-kmax = one ulp at p = kmax.
    let err = fx::ulps_to_rat(kmax as u128 + 1, p);
    BigApprox::new(fx::to_rat(&acc, p), err)
}

/// pi = 16 arctan(1/5) - 4 arctan(1/239); independent oracle for t(2) checks.
pub fn machin_pi(target: &Rat) -> BigApprox {
    let p = guard_bits(target);
    let a5 = arctan_inv(5, p);
    let a239 = arctan_inv(239, p);
    let value = fx::to_rat(&a5.0, p) * Rat::from_integer(BigInt::from(16))
        - fx::to_rat(&a239.0, p) * Rat::from_integer(BigInt::from(4));
    let err = fx::ulps_to_rat(16 * a5.1 + 4 * a239.1, p);
    BigApprox::new(value, err)
}

/// arctan(1/x) by its alternating series; returns (mantissa, err ulps).
fn arctan_inv(x: u64, p: u32) -> (BigInt, u128) {
    let xx = BigInt::from(x) * BigInt::from(x);
    let mut power = fx::one(p) / BigInt::from(x);
    let mut acc = BigInt::zero();
    let mut err: u128 = 0;
    let mut j: u64 = 0;
    while !power.is_zero() {
        let term = &power / BigInt::from(2 * j + 1);
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
        // Power chain and term division each stay within a couple of ulps.
        err += 4;
        power = &power / &xx;
        j += 1;
    }
    // True tail after the chain hits zero is below the error already counted.
    (acc, err + 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, rat_int};
    use crate::approx::{format_decimal, pow10};

    #[test]
    fn bernoulli_small() {
        let b = bernoulli(8);
        assert_eq!(b[0], rat_int(1));
        assert_eq!(b[1], rat(-1, 2));
        assert_eq!(b[2], rat(1, 6));
        assert_eq!(b[3], rat_int(0));
        assert_eq!(b[4], rat(-1, 30));
        assert_eq!(b[6], rat(1, 42));
        assert_eq!(b[8], rat(-1, 30));
    }

    #[test]
    fn zeta_two_matches_pi() {
        let target = pow10(-40);
        let z2 = zeta(2, &target).unwrap();
        assert!(z2.err_abs <= target);
        let pi = machin_pi(&target);
        let pi_sq_over6 = pi.mul(&pi).scale(&rat(1, 6));
        assert!(z2.agrees_with(&pi_sq_over6));
    }

    #[test]
    fn zeta_known_digits() {
        let target = pow10(-30);
        // zeta(3) = 1.202056903159594285399738161511...
        let z3 = zeta(3, &target).unwrap();
        assert_eq!(format_decimal(&z3.value, 25), "1.2020569031595942853997382");
        // zeta(4) = pi^4/90 = 1.0823232337111381915160036965...
        let z4 = zeta(4, &target).unwrap();
        assert_eq!(format_decimal(&z4.value, 25), "1.0823232337111381915160037");
        // zeta(10) = 1.0009945751278180853371459589...
        let z10 = zeta(10, &target).unwrap();
        assert_eq!(format_decimal(&z10.value, 25), "1.0009945751278180853371460");
    }

    #[test]
    fn log2_digits() {
        let target = pow10(-40);
        let l = log2(&target);
        assert!(l.err_abs <= target);
        assert_eq!(format_decimal(&l.value, 15), "0.693147180559945");
    }

    #[test]
    fn pi_digits() {
        let target = pow10(-40);
        let pi = machin_pi(&target);
        assert!(pi.err_abs <= target);
        assert_eq!(format_decimal(&pi.value, 20), "3.14159265358979323846");
    }
}
