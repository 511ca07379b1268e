//! Word-level evaluation of t-values.
//!
//! A t-value splits over sign vectors into alternating zeta values, each of
//! which is an iterated integral over a word in dt/t, dt/(1-t), -dt/(1+t).
//! The Hoelder convolution rewrites that integral over [0,1] as a sum of
//! products of partial integrals over [0,1/2], where every power series in
//! sight has coefficients bounded by one, so truncating at M terms costs at
//! most 2^-M of the value at 1/2.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::algebra::Rat;
use crate::eval::fx;
use crate::index::Index;

/// Decomposition t(a) = sum of coeff * zeta(a; signs) over sign vectors.
///
/// Entries are ordered lexicographically by the signs vector with +1 before
/// -1; each coefficient is (-1)^{number of -1 entries} / 2^depth.
#[derive(Clone, Debug, PartialEq)]
pub struct SignExpansion {
    pub entries: Vec<(Rat, Vec<i8>)>,
}

pub fn sign_expansion(a: &Index) -> SignExpansion {
    let r = a.depth();
    assert!(r <= 32, "sign expansion has 2^depth entries");
    let denom = BigInt::one() << r;
    let mut entries = Vec::with_capacity(1usize << r);
    for mask in 0u64..(1u64 << r) {
        let mut signs = Vec::with_capacity(r);
        for i in 0..r {
            let neg = mask >> (r - 1 - i) & 1 == 1;
            signs.push(if neg { -1i8 } else { 1i8 });
        }
        let numer = if mask.count_ones() % 2 == 0 {
            BigInt::one()
        } else {
            -BigInt::one()
        };
        entries.push((Rat::new(numer, denom.clone()), signs));
    }
    SignExpansion { entries }
}

/// One-form in the iterated integrals.
///
/// `Zero` is dt/t, `PoleOne` is dt/(1-t), `PoleMinusOne` is -dt/(1+t), and
/// `PoleTwo` is dt/(2-t), which only arises as the reflection of
/// `PoleMinusOne` in left half-words.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Letter {
    Zero,
    PoleOne,
    PoleMinusOne,
    PoleTwo,
}

/// Reflection t -> 1-t on letters.
pub fn tau(l: Letter) -> Letter {
    match l {
        Letter::Zero => Letter::PoleOne,
        Letter::PoleOne => Letter::Zero,
        Letter::PoleMinusOne => Letter::PoleTwo,
        Letter::PoleTwo => Letter::PoleMinusOne,
    }
}

/// Word for zeta(a; signs): block j contributes a_j - 1 copies of dt/t and
/// then the pole letter for the cumulative sign product of the first j signs.
pub fn word_for(a: &Index, signs: &[i8]) -> Vec<Letter> {
    assert_eq!(signs.len(), a.depth());
    let mut out = Vec::with_capacity(a.weight() as usize);
    let mut cum = 1i8;
    for (part, sign) in a.parts().iter().zip(signs) {
        for _ in 1..*part {
            out.push(Letter::Zero);
        }
        cum *= sign;
        out.push(if cum == 1 {
            Letter::PoleOne
        } else {
            Letter::PoleMinusOne
        });
    }
    out
}

/// Power series of a partial integral from 0 to t, in fixed point.
///
/// Coefficients are exact up to `err_ulps` units in the last place each; the
/// bound is uniform over the coefficients. True coefficients stay in [-1, 1].
struct SeriesState {
    coeff: Vec<BigInt>,
    err_ulps: u128,
}

impl SeriesState {
    /// The constant series 1, the empty word.
    fn empty(p: u32) -> Self {
        let mut coeff = vec![BigInt::zero(); p as usize + 1];
        coeff[0] = fx::one(p);
        SeriesState { coeff, err_ulps: 0 }
    }

    /// Multiply by the letter's form and integrate from 0.
    ///
    /// Each recursion divides a running sum whose error matches the running
    /// denominator, so the uniform coefficient error grows by one ulp per
    /// letter, two for the pole at 2 where halving the running sum truncates.
    fn apply(&mut self, l: Letter) {
        let m_max = self.coeff.len() - 1;
        match l {
            Letter::Zero => {
                debug_assert!(self.coeff[0].is_zero(), "dt/t needs a vanishing constant term");
                for m in 1..=m_max {
                    self.coeff[m] = &self.coeff[m] / BigInt::from(m as u64);
                }
                self.err_ulps += 1;
            }
            Letter::PoleOne => {
                let mut out = vec![BigInt::zero(); m_max + 1];
                let mut run = BigInt::zero();
                for n in 0..m_max {
                    run += &self.coeff[n];
                    out[n + 1] = &run / BigInt::from(n as u64 + 1);
                }
                self.coeff = out;
                self.err_ulps += 1;
            }
            Letter::PoleMinusOne => {
                let mut out = vec![BigInt::zero(); m_max + 1];
                let mut run = BigInt::zero();
                for n in 0..m_max {
                    if n % 2 == 0 {
                        run += &self.coeff[n];
                    } else {
                        run -= &self.coeff[n];
                    }
                    let q = &run / BigInt::from(n as u64 + 1);
                    out[n + 1] = if n % 2 == 0 { -q } else { q };
                }
                self.coeff = out;
                self.err_ulps += 1;
            }
            Letter::PoleTwo => {
                let mut out = vec![BigInt::zero(); m_max + 1];
                let mut run = BigInt::zero();
                for n in 0..m_max {
                    run = &run / 2 + &self.coeff[n];
                    out[n + 1] = &run / BigInt::from(2 * (n as u64 + 1));
                }
                self.coeff = out;
                self.err_ulps += 2;
            }
        }
    }

    /// Series value at t = 1/2 by Horner, with its error in ulps.
    fn value_at_half(&self) -> (BigInt, u128) {
        let mut v = self.coeff[self.coeff.len() - 1].clone();
        for m in (0..self.coeff.len() - 1).rev() {
            v = &self.coeff[m] + &v / 2;
        }
        // Coefficient errors geometric-sum to 2E, Horner truncations and the
        // series tail to under 4 more.
        (v, 2 * self.err_ulps + 4)
    }
}

/// Iterated integral of the word over [0,1] as a fixed-point mantissa.
///
/// Splits at every position: the right part integrates over [0,1/2] as is,
/// the left part reversed and reflected does the same, and the products
/// telescope back to the full integral.
pub(crate) fn word_integral(word: &[Letter], p: u32) -> (BigInt, u128) {
    let n = word.len();
    let mut right = vec![(BigInt::zero(), 0u128); n + 1];
    right[n] = (fx::one(p), 0);
    let mut state = SeriesState::empty(p);
    for k in (0..n).rev() {
        state.apply(word[k]);
        right[k] = state.value_at_half();
    }
    let mut acc = BigInt::zero();
    let mut err: u128 = 0;
    // k = 0: empty left factor.
    acc += &right[0].0;
    err += right[0].1;
    let mut state = SeriesState::empty(p);
    // Reflecting the left half-word turns -dt/(1+t) into +dt/(2-t), and the
    // leftover sign survives the path reversal; dt/t and dt/(1-t) swap with
    // signs that cancel against it. Net effect: one flip per pole at -1.
    let mut negate = false;
    for k in 1..=n {
        state.apply(tau(word[k - 1]));
        if word[k - 1] == Letter::PoleMinusOne {
            negate = !negate;
        }
        let (lv, le) = state.value_at_half();
        let (rv, re) = &right[k];
        let prod = fx::mul(&lv, rv, p);
        if negate {
            acc -= prod;
        } else {
            acc += prod;
        }
        err += le + re + 2;
    }
    (acc, err)
}

/// t(a) as a fixed-point mantissa at p bits with its error in ulps.
pub(crate) fn t_mantissa(a: &Index, p: u32) -> (BigInt, u128) {
    assert!(a.is_admissible(), "word evaluation needs a convergent value");
    let r = a.depth();
    let expansion = sign_expansion(a);
    let mut acc = BigInt::zero();
    let mut err: u128 = 0;
    for (coeff, signs) in &expansion.entries {
        let word = word_for(a, signs);
        let (v, e) = word_integral(&word, p);
        if coeff.numer().is_negative() {
            acc -= v;
        } else {
            acc += v;
        }
        err += e;
    }
    // All coefficients are +-2^-r; one truncating division closes it out.
    acc = acc / (BigInt::one() << r);
    (acc, err / (1u128 << r) + 2)
}
