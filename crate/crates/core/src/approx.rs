//! Arbitrary-precision reals carrying explicit absolute error bounds.
//!
//! Values and bounds are exact rationals, so arithmetic here never introduces
//! hidden rounding: every operation widens err_abs conservatively and the
//! true quantity always stays inside [value - err_abs, value + err_abs].

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::algebra::Rat;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ApproxError {
    #[error("cannot parse decimal {0:?}")]
    BadDecimal(String),
}

/// x = value +/- err_abs with err_abs >= 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigApprox {
    pub value: Rat,
    pub err_abs: Rat,
}

impl BigApprox {
    pub fn new(value: Rat, err_abs: Rat) -> Self {
        assert!(!err_abs.is_negative(), "error bound must be non-negative");
        BigApprox { value, err_abs }
    }

    pub fn exact(value: Rat) -> Self {
        BigApprox { value, err_abs: Rat::zero() }
    }

    pub fn zero() -> Self {
        BigApprox::exact(Rat::zero())
    }

    pub fn add(&self, other: &BigApprox) -> Self {
        BigApprox {
            value: &self.value + &other.value,
            err_abs: &self.err_abs + &other.err_abs,
        }
    }

    pub fn sub(&self, other: &BigApprox) -> Self {
        BigApprox {
            value: &self.value - &other.value,
            err_abs: &self.err_abs + &other.err_abs,
        }
    }

    pub fn neg(&self) -> Self {
        BigApprox { value: -self.value.clone(), err_abs: self.err_abs.clone() }
    }

    pub fn scale(&self, q: &Rat) -> Self {
        BigApprox {
            value: &self.value * q,
            err_abs: &self.err_abs * q.abs(),
        }
    }

    /// |x y - v1 v2| <= |v1| e2 + |v2| e1 + e1 e2.
    pub fn mul(&self, other: &BigApprox) -> Self {
        let err = self.value.abs() * &other.err_abs
            + other.value.abs() * &self.err_abs
            + &self.err_abs * &other.err_abs;
        BigApprox { value: &self.value * &other.value, err_abs: err }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = BigApprox::exact(Rat::one());
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn contains(&self, x: &Rat) -> bool {
        (&self.value - x).abs() <= self.err_abs
    }

    /// Upper bound on |true value|.
    pub fn abs_upper(&self) -> Rat {
        self.value.abs() + &self.err_abs
    }

    /// The intervals of the two enclosures intersect.
    pub fn agrees_with(&self, other: &BigApprox) -> bool {
        (&self.value - &other.value).abs() <= &self.err_abs + &other.err_abs
    }

    /// Certifies |true value| < threshold.
    pub fn is_below(&self, threshold: &Rat) -> bool {
        self.abs_upper() < *threshold
    }

    pub fn to_decimal(&self, places: u32) -> String {
        format_decimal(&self.value, places)
    }

    /// Smallest integer e with err_abs <= 10^e; None for exact values.
    pub fn err_exponent(&self) -> Option<i64> {
        if self.err_abs.is_zero() {
            return None;
        }
        Some(ceil_log10(&self.err_abs))
    }
}

impl fmt::Display for BigApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.err_exponent() {
            Some(e) => write!(f, "{} (err <= 10^{})", format_decimal(&self.value, 20), e),
            None => write!(f, "{} (exact)", format_decimal(&self.value, 20)),
        }
    }
}

pub fn pow10(e: i64) -> Rat {
    let base = BigInt::from(10u32);
    if e >= 0 {
        Rat::from_integer(base.pow(e as u32))
    } else {
        Rat::new(BigInt::one(), base.pow((-e) as u32))
    }
}

/// Smallest e with x <= 10^e, for x > 0.
pub fn ceil_log10(x: &Rat) -> i64 {
    assert!(x.is_positive());
    // Digit-length difference brackets the magnitude within one.
    let digits = |n: &BigInt| n.abs().to_string().len() as i64;
    let mut e = digits(x.numer()) - digits(x.denom());
    while pow10(e) < *x {
        e += 1;
    }
    while pow10(e - 1) >= *x {
        e -= 1;
    }
    e
}

/// x * 10^places rounded to an integer, ties to even. Sign-symmetric.
fn scaled_round_half_even(x: &Rat, places: u32) -> BigInt {
    let scaled = x * pow10(places as i64);
    let (q, r) = scaled.numer().div_mod_floor(scaled.denom());
    // div_mod_floor gives 0 <= r < denom, so compare 2r against the denominator.
    let twice = &r * BigInt::from(2u32);
    match twice.cmp(scaled.denom()) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal => {
            if q.is_even() {
                q
            } else {
                q + 1
            }
        }
    }
}

/// Fixed-point decimal with exactly `places` digits after the point,
/// round-half-even.
pub fn format_decimal(x: &Rat, places: u32) -> String {
    let negative = x.is_negative();
    let m = scaled_round_half_even(&x.abs(), places);
    let ten_p = BigInt::from(10u32).pow(places);
    let (int_part, frac_part) = m.div_rem(&ten_p);
    let sign = if negative && !m.is_zero() { "-" } else { "" };
    if places == 0 {
        return format!("{sign}{int_part}");
    }
    let frac = frac_part.to_string();
    let pad = places as usize - frac.len();
    format!("{sign}{int_part}.{}{}", "0".repeat(pad), frac)
}

/// Exact value of a plain decimal string (optional sign and fraction part).
pub fn parse_decimal(s: &str) -> Result<Rat, ApproxError> {
    let bad = || ApproxError::BadDecimal(s.to_owned());
    let t = s.trim();
    let (sign, rest) = match t.strip_prefix('-') {
        Some(r) => (-1, r),
        None => (1, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_str, frac_str) = match rest.split_once('.') {
        Some((a, b)) => (a, b),
        None => (rest, ""),
    };
    if int_str.is_empty() && frac_str.is_empty() {
        return Err(bad());
    }
    let digits_only = |p: &str| p.chars().all(|c| c.is_ascii_digit());
    if !digits_only(int_str) || !digits_only(frac_str) {
        return Err(bad());
    }
    let combined = format!("{int_str}{frac_str}");
    let n: BigInt = if combined.is_empty() {
        BigInt::zero()
    } else {
        combined.parse().map_err(|_| bad())?
    };
    let d = BigInt::from(10u32).pow(frac_str.len() as u32);
    Ok(Rat::new(n * BigInt::from(sign), d))
}

/// err_exp as stored in cache entries: err_abs <= 10^err_exp must hold.
pub fn within_err_exp(err_abs: &Rat, err_exp: i64) -> bool {
    *err_abs <= pow10(err_exp)
}
