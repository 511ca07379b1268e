//! Fixed-point scaffolding: a value is a BigInt mantissa scaled by 2^-p.
//!
//! Every rounding operation truncates toward zero, so a single multiply,
//! divide, or conversion costs at most one ulp of absolute error; additions
//! are exact. Callers account errors as ulp counters next to the mantissas.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::algebra::Rat;

pub fn one(p: u32) -> BigInt {
    BigInt::one() << p
}

/// trunc(x * 2^p); off by less than one ulp.
pub fn from_rat(x: &Rat, p: u32) -> BigInt {
    (x.numer() << p) / x.denom()
}

pub fn to_rat(m: &BigInt, p: u32) -> Rat {
    Rat::new(m.clone(), BigInt::one() << p)
}

/// trunc(a b / 2^p). BigInt division truncates toward zero for either sign,
/// which keeps the one-ulp accounting uniform; shifts are avoided since they
/// floor instead.
pub fn mul(a: &BigInt, b: &BigInt, p: u32) -> BigInt {
    (a * b) / one(p)
}

/// base^(-exp) at scale p via a truncating division chain; at most 2 ulps
/// below the true value, never above it.
pub fn inv_pow(base: u64, exp: u32, p: u32) -> BigInt {
    if base == 1 {
        return one(p);
    }
    let b = BigInt::from(base);
    let mut x = one(p);
    for _ in 0..exp {
        if x.is_zero() {
            break;
        }
        x /= &b;
    }
    x
}

pub fn ulps_to_rat(ulps: u128, p: u32) -> Rat {
    Rat::new(BigInt::from(ulps), BigInt::one() << p)
}
