//! PSLQ lattice search for integer relations.
//!
//! Fixed-point port of the classic algorithm: y, s, H live at p fractional
//! bits while the transformation matrices A and B stay exact integers, so a
//! candidate coefficient vector is read straight out of a column of B.
//! Everything is deterministic: truncating fixed-point products, floor-based
//! rounding to the nearest integer, and smallest-index tie breaks.

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_traits::{One, Signed, Zero};

use crate::algebra::Rat;
use crate::eval::fx;

/// Round a fixed-point quantity to the nearest integer, half up, via floor.
fn round_to_int(q: &BigInt, p: u32) -> BigInt {
    let half = BigInt::one() << (p - 1);
    (q + half).div_floor(&(BigInt::one() << p))
}

/// Floor square root at fixed scale: isqrt(x * 2^p) for x at scale p.
fn sqrt_fixed(x: &BigInt, p: u32) -> BigInt {
    assert!(!x.is_negative());
    (x << p).sqrt()
}

/// One candidate acceptance pass: the callback sees a raw column of B and
/// decides whether the vector survives exact verification. Rejected vectors
/// are remembered so the search moves on instead of re-offering them.
pub(crate) fn search(
    values: &[Rat],
    p: u32,
    tol_bits: u32,
    coeff_bound: &BigInt,
    max_steps: usize,
    accept: &mut dyn FnMut(&[BigInt]) -> bool,
) -> Option<Vec<BigInt>> {
    let n = values.len();
    assert!(n >= 2, "search needs at least two values");
    assert!(tol_bits < p);
    let one = BigInt::one() << p;
    let tol = BigInt::one() << (p - tol_bits);
    let mut rejected: Vec<Vec<BigInt>> = Vec::new();

    // 1-based arrays with a dummy slot 0, matching the textbook indexing.
    let mut x = vec![BigInt::zero(); n + 1];
    for (i, v) in values.iter().enumerate() {
        x[i + 1] = fx::from_rat(v, p);
    }
    let min_x = x[1..].iter().map(|v| v.abs()).min().expect("nonempty");
    if min_x <= (&tol >> 8) {
        // A value indistinguishable from zero makes the normalization and
        // any found relation meaningless at this precision.
        return None;
    }

    // gamma = sqrt(4/3) at scale p.
    let gamma = sqrt_fixed(&((BigInt::from(4) << p) / BigInt::from(3)), p);

    let mut a = ident(n);
    let mut b = ident(n);
    let mut h = vec![vec![BigInt::zero(); n + 1]; n + 1];

    // Partial norms s[k] = sqrt(sum_{j>=k} x_j^2), then normalize by s[1].
    let mut s = vec![BigInt::zero(); n + 1];
    for k in 1..=n {
        let mut t = BigInt::zero();
        for j in k..=n {
            t += fx::mul(&x[j], &x[j], p);
        }
        s[k] = sqrt_fixed(&t, p);
    }
    let t = s[1].clone();
    let mut y = x;
    for k in 1..=n {
        y[k] = (&y[k] << p) / &t;
        s[k] = (&s[k] << p) / &t;
    }

    // Initial H: lower trapezoidal with the s-ratios on the diagonal.
    for i in 1..=n {
        if i < n && !s[i].is_zero() {
            h[i][i] = (&s[i + 1] << p) / &s[i];
        }
        for j in 1..i {
            let sjj1 = &s[j] * &s[j + 1];
            if !sjj1.is_zero() {
                h[i][j] = ((-&y[i] * &y[j]) << p) / sjj1;
            }
        }
    }

    // Full size reduction of H, mirrored into A, B, y.
    for i in 2..=n {
        for j in (1..i).rev() {
            if h[j][j].is_zero() {
                continue;
            }
            let t = round_to_int(&((&h[i][j] << p) / &h[j][j]), p);
            if t.is_zero() {
                continue;
            }
            y[j] = &y[j] + &t * &y[i];
            for k in 1..=j {
                let d = &t * &h[j][k];
                h[i][k] -= d;
            }
            for k in 1..=n {
                let da = &t * &a[j][k];
                a[i][k] -= da;
                let db = &t * &b[k][i];
                b[k][j] += db;
            }
        }
    }

    for _step in 0..max_steps {
        // Termination test: a tiny y entry exposes a relation in B.
        for i in 1..=n {
            if y[i].abs() < tol {
                let vector: Vec<BigInt> = (1..=n).map(|j| b[j][i].clone()).collect();
                let maxc = vector.iter().map(|v| v.abs()).max().expect("nonempty");
                if maxc.is_zero() || &maxc > coeff_bound {
                    continue;
                }
                if rejected.contains(&vector) {
                    continue;
                }
                if accept(&vector) {
                    return Some(vector);
                }
                rejected.push(vector);
            }
        }

        // Lower bound on the norm of any remaining relation; once it clears
        // the coefficient bound the search space is exhausted.
        let recnorm = h
            .iter()
            .flat_map(|row| row.iter())
            .map(|v| v.abs())
            .max()
            .expect("nonempty");
        if recnorm.is_zero() {
            return None;
        }
        let norm = (((BigInt::one() << (2 * p)) / recnorm) >> p) / BigInt::from(100);
        if &norm >= coeff_bound {
            return None;
        }

        // Row choice: argmax of gamma^i |H_ii|, smallest index on ties.
        let mut m = 0usize;
        let mut sz_max = BigInt::from(-1);
        let mut gpow = one.clone();
        for i in 1..n {
            gpow = fx::mul(&gpow, &gamma, p);
            let sz = fx::mul(&gpow, &h[i][i].abs(), p);
            if sz > sz_max {
                m = i;
                sz_max = sz;
            }
        }

        y.swap(m, m + 1);
        h.swap(m, m + 1);
        a.swap(m, m + 1);
        for row in b.iter_mut().skip(1) {
            row.swap(m, m + 1);
        }

        // Undo the corner the swap introduced with a plane rotation.
        if m <= n - 2 {
            let t0 = sqrt_fixed(
                &(fx::mul(&h[m][m], &h[m][m], p) + fx::mul(&h[m][m + 1], &h[m][m + 1], p)),
                p,
            );
            if t0.is_zero() {
                return None;
            }
            let t1 = (&h[m][m] << p) / &t0;
            let t2 = (&h[m][m + 1] << p) / &t0;
            for i in m..=n {
                let t3 = h[i][m].clone();
                let t4 = h[i][m + 1].clone();
                h[i][m] = fx::mul(&t1, &t3, p) + fx::mul(&t2, &t4, p);
                h[i][m + 1] = fx::mul(&t1, &t4, p) - fx::mul(&t2, &t3, p);
            }
        }

        // Partial size reduction below the swapped rows.
        for i in (m + 1)..=n {
            for j in (1..=(i - 1).min(m + 1)).rev() {
                if h[j][j].is_zero() {
                    return None;
                }
                let t = round_to_int(&((&h[i][j] << p) / &h[j][j]), p);
                if t.is_zero() {
                    continue;
                }
                y[j] = &y[j] + &t * &y[i];
                for k in 1..=j {
                    let d = &t * &h[j][k];
                    h[i][k] -= d;
                }
                for k in 1..=n {
                    let da = &t * &a[j][k];
                    a[i][k] -= da;
                    let db = &t * &b[k][i];
                    b[k][j] += db;
                }
            }
        }
    }
    None
}

fn ident(n: usize) -> Vec<Vec<BigInt>> {
    let mut m = vec![vec![BigInt::zero(); n + 1]; n + 1];
    for (i, row) in m.iter_mut().enumerate().skip(1) {
        row[i] = BigInt::one();
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, rat_int};

    fn run(values: &[Rat], bound: i64) -> Option<Vec<BigInt>> {
        search(
            values,
            256,
            120,
            &BigInt::from(bound),
            1000,
            &mut |_: &[BigInt]| true,
        )
    }

    #[test]
    fn finds_exact_halving() {
        let got = run(&[rat_int(1), rat(1, 2)], 1000).unwrap();
        // Sign is not canonical at this layer.
        assert!(got == vec![BigInt::from(1), BigInt::from(-2)]
            || got == vec![BigInt::from(-1), BigInt::from(2)]);
    }

    #[test]
    fn finds_three_term_relation() {
        // 3x + 5y - z = 0 for x = 1/7, y = 2/3, z = 79/21.
        let got = run(&[rat(1, 7), rat(2, 3), rat(79, 21)], 1000).unwrap();
        let norm: Vec<i64> = got
            .iter()
            .map(|c| {
                use num_traits::ToPrimitive;
                c.to_i64().unwrap()
            })
            .collect();
        assert!(norm == vec![3, 5, -1] || norm == vec![-3, -5, 1]);
    }

    #[test]
    fn no_relation_for_generic_irrationals() {
        // sqrt(2) and sqrt(3) admit no small integer relation with 1.
        let sqrt = |k: u64| {
            let m = (BigInt::from(k) << 128u32).sqrt();
            Rat::new(m, BigInt::one() << 64)
        };
        let got = run(&[rat_int(1), sqrt(2), sqrt(3)], 1000);
        assert!(got.is_none());
    }

    #[test]
    fn rejected_candidates_are_not_reoffered() {
        let mut offered = Vec::new();
        let got = search(
            &[rat_int(1), rat(1, 2)],
            256,
            120,
            &BigInt::from(1000),
            1000,
            &mut |v: &[BigInt]| {
                offered.push(v.to_vec());
                false
            },
        );
        assert!(got.is_none());
        for pair in offered.windows(2) {
            assert_ne!(pair[0], pair[1]);
        }
    }
}
