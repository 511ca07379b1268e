//! Composition enumeration for odd multiple t-values.
//!
//! An index (a_1, ..., a_r) is a nonempty composition of its weight w = a_1 +
//! ... + a_r with depth r; it is admissible when a_1 >= 2, which is exactly
//! the condition for the nested odd sum to converge. The conjectural basis in
//! weight k collects the indices obtained from the {1,2}-compositions of k-1
//! by raising the first part, so its size is the Fibonacci number F_k.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IndexError {
    #[error("an index needs at least one part")]
    Empty,
    #[error("index parts must be positive")]
    ZeroPart,
    #[error("weight must be at least {min}, got {k}")]
    WeightTooSmall { k: u32, min: u32 },
    #[error("weight {k} too large for exact counting")]
    WeightTooLarge { k: u32 },
    #[error("allowed part set contains no positive part")]
    NoAllowedParts,
    #[error("hyperplane position {i} exceeds depth {r}")]
    PositionExceedsDepth { i: u32, r: u32 },
    #[error("cannot parse index from {input:?}: {reason}")]
    Parse { input: String, reason: &'static str },
}

/// A composition index for a t-value, e.g. `t(3,2)` has parts `[3, 2]`.
///
/// Invariants: nonempty, every part positive. Ordering is lexicographic on
/// the part sequence, so enumeration output can be sorted directly.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Index {
    parts: Vec<u32>,
}

impl Index {
    pub fn new(parts: Vec<u32>) -> Result<Self, IndexError> {
        if parts.is_empty() {
            return Err(IndexError::Empty);
        }
        if parts.iter().any(|&p| p == 0) {
            return Err(IndexError::ZeroPart);
        }
        let w: u64 = parts.iter().map(|&p| p as u64).sum();
        if u32::try_from(w).is_err() {
            return Err(IndexError::WeightTooLarge { k: u32::MAX });
        }
        Ok(Index { parts })
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn weight(&self) -> u32 {
        self.parts.iter().sum()
    }

    pub fn depth(&self) -> usize {
        self.parts.len()
    }

    /// The nested sum converges iff the outer exponent is at least 2.
    pub fn is_admissible(&self) -> bool {
        self.parts[0] >= 2
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for Index {
    type Err = IndexError;

    /// Accepts `t(2,1,2)` or bare `2,1,2`, with optional whitespace.
    fn from_str(s: &str) -> Result<Self, IndexError> {
        let trimmed = s.trim();
        let inner = if let Some(rest) = trimmed.strip_prefix("t(") {
            rest.strip_suffix(')').ok_or(IndexError::Parse {
                input: s.to_owned(),
                reason: "missing closing parenthesis",
            })?
        } else {
            trimmed
        };
        if inner.trim().is_empty() {
            return Err(IndexError::Parse {
                input: s.to_owned(),
                reason: "no parts",
            });
        }
        let mut parts = Vec::new();
        for piece in inner.split(',') {
            let p: u32 = piece.trim().parse().map_err(|_| IndexError::Parse {
                input: s.to_owned(),
                reason: "parts must be positive integers",
            })?;
            parts.push(p);
        }
        Index::new(parts).map_err(|e| match e {
            IndexError::ZeroPart => IndexError::Parse {
                input: s.to_owned(),
                reason: "parts must be positive integers",
            },
            other => other,
        })
    }
}

/// All compositions of `n` with parts drawn from `allowed`, in ascending
/// lexicographic order. `compositions(0, ..)` is empty: the empty composition
/// is excluded from the public surface.
pub fn compositions(n: u32, allowed: &[u32]) -> Result<Vec<Vec<u32>>, IndexError> {
    let mut parts: Vec<u32> = allowed.iter().copied().filter(|&p| p > 0).collect();
    parts.sort_unstable();
    parts.dedup();
    if parts.is_empty() {
        return Err(IndexError::NoAllowedParts);
    }
    let mut out = Vec::new();
    if n == 0 {
        return Ok(out);
    }
    let mut prefix = Vec::new();
    extend_compositions(n, &parts, &mut prefix, &mut out);
    Ok(out)
}

fn extend_compositions(rem: u32, parts: &[u32], prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if rem == 0 {
        out.push(prefix.clone());
        return;
    }
    for &p in parts {
        if p > rem {
            break;
        }
        prefix.push(p);
        extend_compositions(rem - p, parts, prefix, out);
        prefix.pop();
    }
}

/// The conjectural weight-k basis C_k: each {1,2}-composition of k-1 with its
/// first part raised by one. Ascending lexicographic; |C_k| = F_k with
/// F_2 = 1, F_3 = 2.
pub fn conjectural_basis(k: u32) -> Result<Vec<Index>, IndexError> {
    if k < 2 {
        return Err(IndexError::WeightTooSmall { k, min: 2 });
    }
    let mut out = Vec::new();
    for mut c in compositions(k - 1, &[1, 2])? {
        c[0] += 1;
        out.push(Index::new(c).expect("raised composition is a valid index"));
    }
    Ok(out)
}

/// All admissible indices of weight k, ascending lexicographic. There are
/// 2^(k-2) of them.
pub fn admissible_indices(k: u32) -> Result<Vec<Index>, IndexError> {
    if k < 2 {
        return Err(IndexError::WeightTooSmall { k, min: 2 });
    }
    let allowed: Vec<u32> = (1..=k).collect();
    let mut out = vec![Index::new(vec![k]).expect("k >= 2")];
    for first in 2..k {
        for mut c in compositions(k - first, &allowed)? {
            c.insert(0, first);
            out.push(Index::new(c).expect("composition parts are positive"));
        }
    }
    out.sort();
    Ok(out)
}

/// Predicted dimensions in weight k: the Fibonacci count F_k of the
/// conjectural t-value basis and the count d_k of {2,3}-compositions of k
/// (d_2 = d_3 = d_4 = 1, d_k = d_{k-2} + d_{k-3}).
pub fn predicted_dims(k: u32) -> Result<(u64, u64), IndexError> {
    if k < 2 {
        return Err(IndexError::WeightTooSmall { k, min: 2 });
    }
    // F_2 = 1, F_3 = 2.
    let mut f = (1u64, 2u64);
    for _ in 3..=k {
        f = (f.1, f.0.checked_add(f.1).ok_or(IndexError::WeightTooLarge { k })?);
    }
    let fib = if k == 2 { 1 } else { f.0 };
    // d_2 = d_3 = d_4 = 1, then d_k = d_{k-2} + d_{k-3}.
    let mut d = (1u64, 1u64, 1u64);
    for _ in 5..=k {
        d = (
            d.1,
            d.2,
            d.0.checked_add(d.1).ok_or(IndexError::WeightTooLarge { k })?,
        );
    }
    let dim = match k {
        2 => 1,
        3 => 1,
        _ => d.2,
    };
    Ok((fib, dim))
}

/// The hyperplane s_1 + ... + s_i = i - k in depth-r index space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Hyperplane {
    i: u32,
    k: u32,
}

impl Hyperplane {
    pub fn new(i: u32, k: u32) -> Result<Self, IndexError> {
        if i == 0 {
            return Err(IndexError::ZeroPart);
        }
        Ok(Hyperplane { i, k })
    }

    pub fn position(&self) -> u32 {
        self.i
    }

    pub fn shift(&self) -> u32 {
        self.k
    }
}

impl fmt::Display for Hyperplane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H({},{})", self.i, self.k)
    }
}

/// Whether `h` carries a polar singularity of the depth-r t-value continuation.
///
/// The polar list: H(1,0); in position 2 only k = 1 and even k; in positions
/// 3..=r every k. In particular H(2,k) for odd k >= 3 is not polar, which is
/// the qualitative difference from the zeta-value case.
pub fn is_polar(r: u32, h: Hyperplane) -> Result<bool, IndexError> {
    if h.i > r {
        return Err(IndexError::PositionExceedsDepth { i: h.i, r });
    }
    Ok(match h.i {
        1 => h.k == 0,
        2 => h.k == 1 || h.k % 2 == 0,
        _ => true,
    })
}
