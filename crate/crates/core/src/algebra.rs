//! The formal commutative algebra of t-values over Q.
//!
//! Monomials are multisets of atoms (t-values and the constant log 2); a
//! Combo maps monomials to rational coefficients. The stuffle product turns
//! products of t-atoms back into Q-linear combinations, and `normalize`
//! applies it until every monomial carries at most one t-atom.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::index::{Index, IndexError};

/// Exact rational scalar; always stored reduced with positive denominator.
pub type Rat = num_rational::BigRational;

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Renders `n/d` reduced; integers drop the denominator.
pub fn rat_to_string(q: &Rat) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn rat_from_string(s: &str) -> Result<Rat, AlgebraError> {
    let bad = || AlgebraError::BadRational(s.to_owned());
    let mut pieces = s.trim().splitn(2, '/');
    let numer: BigInt = pieces.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
    let denom: BigInt = match pieces.next() {
        Some(d) => d.trim().parse().map_err(|_| bad())?,
        None => BigInt::one(),
    };
    if denom.is_zero() {
        return Err(bad());
    }
    Ok(Rat::new(numer, denom))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("index {0} is not admissible (first part must be >= 2)")]
    NotAdmissible(Index),
    #[error("invalid index: {0}")]
    Index(#[from] IndexError),
    #[error("cannot parse rational {0:?}")]
    BadRational(String),
    #[error("cannot parse monomial key {0:?}")]
    BadMonomial(String),
    #[error("combo JSON must be an object of key -> rational string")]
    BadComboJson,
}

/// A single algebra generator: an admissible t-value or the constant log 2.
///
/// Ordering puts Log2 before every t-atom and orders t-atoms by their part
/// sequences, which fixes the factor order inside monomial keys.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Log2,
    T(Index),
}

impl Atom {
    pub fn t(index: Index) -> Result<Self, AlgebraError> {
        if !index.is_admissible() {
            return Err(AlgebraError::NotAdmissible(index));
        }
        Ok(Atom::T(index))
    }

    /// log 2 counts with weight 1, which keeps the known relations
    /// weight-homogeneous.
    pub fn weight(&self) -> u32 {
        match self {
            Atom::Log2 => 1,
            Atom::T(a) => a.weight(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Log2 => write!(f, "log2"),
            Atom::T(a) => write!(f, "{a}"),
        }
    }
}

/// A commutative product of atoms, stored sorted; the empty product is 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    atoms: Vec<Atom>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn from_atoms(mut atoms: Vec<Atom>) -> Self {
        atoms.sort();
        Monomial { atoms }
    }

    pub fn atom(a: Atom) -> Self {
        Monomial { atoms: vec![a] }
    }

    pub fn t_value(index: Index) -> Result<Self, AlgebraError> {
        Ok(Monomial::atom(Atom::t(index)?))
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn degree(&self) -> usize {
        self.atoms.len()
    }

    pub fn weight(&self) -> u32 {
        self.atoms.iter().map(Atom::weight).sum()
    }

    pub fn t_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| matches!(a, Atom::T(_))).count()
    }

    pub fn times(&self, other: &Monomial) -> Monomial {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        Monomial::from_atoms(atoms)
    }

    /// Splits off the first two t-atoms; the caller guarantees there are two.
    fn split_two_t(&self) -> (Index, Index, Monomial) {
        let mut first = None;
        let mut second = None;
        let mut rest = Vec::new();
        for a in &self.atoms {
            match a {
                Atom::T(x) if first.is_none() => first = Some(x.clone()),
                Atom::T(x) if second.is_none() => second = Some(x.clone()),
                other => rest.push(other.clone()),
            }
        }
        (
            first.expect("caller checked t_atom_count >= 2"),
            second.expect("caller checked t_atom_count >= 2"),
            Monomial { atoms: rest },
        )
    }

    /// Key grammar: factors joined by `*`, repeated atoms as `atom^e`,
    /// the empty monomial as `1`. Example: `log2^2*t(2,3)`.
    pub fn key(&self) -> String {
        if self.atoms.is_empty() {
            return "1".to_owned();
        }
        let mut out = String::new();
        let mut i = 0;
        while i < self.atoms.len() {
            let mut j = i;
            while j < self.atoms.len() && self.atoms[j] == self.atoms[i] {
                j += 1;
            }
            if !out.is_empty() {
                out.push('*');
            }
            out.push_str(&self.atoms[i].to_string());
            if j - i > 1 {
                out.push_str(&format!("^{}", j - i));
            }
            i = j;
        }
        out
    }

    pub fn parse_key(s: &str) -> Result<Self, AlgebraError> {
        let bad = || AlgebraError::BadMonomial(s.to_owned());
        let trimmed = s.trim();
        if trimmed == "1" {
            return Ok(Monomial::one());
        }
        let mut atoms = Vec::new();
        for factor in trimmed.split('*') {
            let factor = factor.trim();
            let (base, exp) = match factor.rsplit_once('^') {
                Some((b, e)) => {
                    let e: u32 = e.trim().parse().map_err(|_| bad())?;
                    if e == 0 {
                        return Err(bad());
                    }
                    (b.trim(), e)
                }
                None => (factor, 1),
            };
            let atom = if base == "log2" {
                Atom::Log2
            } else {
                let index: Index = base.parse().map_err(|_| bad())?;
                Atom::t(index).map_err(|_| bad())?
            };
            for _ in 0..exp {
                atoms.push(atom.clone());
            }
        }
        if atoms.is_empty() {
            return Err(bad());
        }
        Ok(Monomial::from_atoms(atoms))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.key())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    /// Weight first, then factor sequence; gives the deterministic key order
    /// used everywhere combos are serialized.
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight()
            .cmp(&other.weight())
            .then_with(|| self.degree().cmp(&other.degree()))
            .then_with(|| self.atoms.cmp(&other.atoms))
    }
}

/// A finite Q-linear combination of monomials; zero coefficients are never
/// stored, so equality of maps is equality in the algebra's free module.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Combo {
    terms: BTreeMap<Monomial, Rat>,
}

impl Combo {
    pub fn zero() -> Self {
        Combo::default()
    }

    pub fn term(m: Monomial, q: Rat) -> Self {
        let mut c = Combo::zero();
        c.add_term(m, q);
        c
    }

    pub fn t_value(index: Index) -> Result<Self, AlgebraError> {
        Ok(Combo::term(Monomial::t_value(index)?, Rat::one()))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add_term(&mut self, m: Monomial, q: Rat) {
        if q.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(q);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + &q;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Combo) -> Combo {
        let mut out = self.clone();
        for (m, q) in &other.terms {
            out.add_term(m.clone(), q.clone());
        }
        out
    }

    pub fn sub(&self, other: &Combo) -> Combo {
        self.add(&other.scale(&-Rat::one()))
    }

    pub fn scale(&self, q: &Rat) -> Combo {
        if q.is_zero() {
            return Combo::zero();
        }
        let mut out = Combo::zero();
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), c * q);
        }
        out
    }

    /// Formal product; monomials multiply as multisets. No stuffle rewriting
    /// happens here, pair with `normalize` when a linear form is needed.
    pub fn mul(&self, other: &Combo) -> Combo {
        let mut out = Combo::zero();
        for (m1, q1) in &self.terms {
            for (m2, q2) in &other.terms {
                out.add_term(m1.times(m2), q1 * q2);
            }
        }
        out
    }

    /// Some(k) when nonempty and every monomial has weight k.
    pub fn weight(&self) -> Option<u32> {
        let mut it = self.terms.keys();
        let first = it.next()?.weight();
        if it.all(|m| m.weight() == first) {
            Some(first)
        } else {
            None
        }
    }

    pub fn is_homogeneous(&self, k: u32) -> bool {
        self.terms.keys().all(|m| m.weight() == k)
    }

    /// Keys in canonical order mapped to rational strings.
    pub fn to_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (m, q) in &self.terms {
            map.insert(m.key(), serde_json::Value::String(rat_to_string(q)));
        }
        serde_json::Value::Object(map)
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Combo, AlgebraError> {
        let obj = v.as_object().ok_or(AlgebraError::BadComboJson)?;
        let mut out = Combo::zero();
        for (k, val) in obj {
            let q = match val {
                serde_json::Value::String(s) => rat_from_string(s)?,
                _ => return Err(AlgebraError::BadComboJson),
            };
            out.add_term(Monomial::parse_key(k)?, q);
        }
        Ok(out)
    }
}

impl fmt::Display for Combo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, q)) in self.terms.iter().enumerate() {
            let neg = q.is_negative();
            let mag = q.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let is_one_mono = m.atoms().is_empty();
            if mag.is_one() && !is_one_mono {
                write!(f, "{m}")?;
            } else if is_one_mono {
                write!(f, "{}", rat_to_string(&mag))?;
            } else {
                write!(f, "{}*{m}", rat_to_string(&mag))?;
            }
        }
        Ok(())
    }
}

/// Quasi-shuffle product of two admissible indices: interleavings of the two
/// part sequences with coinciding positions merged by adding exponents.
/// Every output index is admissible of weight weight(u) + weight(v).
pub fn stuffle(u: &Index, v: &Index) -> Result<Combo, AlgebraError> {
    for x in [u, v] {
        if !x.is_admissible() {
            return Err(AlgebraError::NotAdmissible(x.clone()));
        }
    }
    let mut out = Combo::zero();
    for (parts, mult) in stuffle_raw(u.parts(), v.parts()) {
        let index = Index::new(parts).expect("stuffle parts are positive");
        debug_assert!(index.is_admissible());
        out.add_term(
            Monomial::atom(Atom::T(index)),
            Rat::from_integer(BigInt::from(mult)),
        );
    }
    Ok(out)
}

/// (a,u') * (b,v') = (a, u'*(b,v')) + (b, (a,u')*v') + (a+b, u'*v').
fn stuffle_raw(u: &[u32], v: &[u32]) -> Vec<(Vec<u32>, u64)> {
    if u.is_empty() {
        return vec![(v.to_vec(), 1)];
    }
    if v.is_empty() {
        return vec![(u.to_vec(), 1)];
    }
    fn push(head: u32, tails: Vec<(Vec<u32>, u64)>, acc: &mut BTreeMap<Vec<u32>, u64>) {
        for (mut parts, mult) in tails {
            parts.insert(0, head);
            *acc.entry(parts).or_insert(0) += mult;
        }
    }
    let mut acc: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
    push(u[0], stuffle_raw(&u[1..], v), &mut acc);
    push(v[0], stuffle_raw(u, &v[1..]), &mut acc);
    push(u[0] + v[0], stuffle_raw(&u[1..], &v[1..]), &mut acc);
    acc.into_iter().collect()
}

/// Rewrites every monomial holding two or more t-atoms through the stuffle
/// product until each monomial is log2^e or log2^e times a single t-atom.
/// The result equals the input in the algebra and the map is idempotent.
pub fn normalize(c: &Combo) -> Combo {
    let mut out = Combo::zero();
    let mut work: Vec<(Monomial, Rat)> =
        c.iter().map(|(m, q)| (m.clone(), q.clone())).collect();
    while let Some((m, q)) = work.pop() {
        if m.t_atom_count() <= 1 {
            out.add_term(m, q);
            continue;
        }
        let (t1, t2, rest) = m.split_two_t();
        let product = stuffle(&t1, &t2).expect("monomial t-atoms are admissible");
        for (sm, sq) in product.iter() {
            work.push((rest.times(sm), &q * sq));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ix(parts: &[u32]) -> Index {
        Index::new(parts.to_vec()).unwrap()
    }

    fn t_combo(parts: &[u32]) -> Combo {
        Combo::t_value(ix(parts)).unwrap()
    }

    #[test]
    fn stuffle_quoted_fact() {
        let got = stuffle(&ix(&[2]), &ix(&[3])).unwrap();
        let want = t_combo(&[2, 3]).add(&t_combo(&[3, 2])).add(&t_combo(&[5]));
        assert_eq!(got, want);
    }

    #[test]
    fn stuffle_square() {
        let got = stuffle(&ix(&[2]), &ix(&[2])).unwrap();
        let want = t_combo(&[2, 2]).scale(&rat_int(2)).add(&t_combo(&[4]));
        assert_eq!(got, want);
    }

    #[test]
    fn stuffle_depth_two() {
        // (2)*(2,1) = 2(2,2,1) + (2,1,2) + (2,3) + (4,1), five interleavings
        // counted with multiplicity.
        let got = stuffle(&ix(&[2]), &ix(&[2, 1])).unwrap();
        let want = t_combo(&[2, 2, 1])
            .scale(&rat_int(2))
            .add(&t_combo(&[2, 1, 2]))
            .add(&t_combo(&[2, 3]))
            .add(&t_combo(&[4, 1]));
        assert_eq!(got, want);
    }

    #[test]
    fn stuffle_rejects_leading_one() {
        assert!(stuffle(&ix(&[1, 2]), &ix(&[2])).is_err());
    }

    #[test]
    fn normalize_product() {
        let product = t_combo(&[2]).mul(&t_combo(&[3]));
        let want = t_combo(&[2, 3]).add(&t_combo(&[3, 2])).add(&t_combo(&[5]));
        assert_eq!(normalize(&product), want);
        assert_eq!(normalize(&want), want);
    }

    #[test]
    fn normalize_keeps_log2() {
        let m = Monomial::from_atoms(vec![Atom::Log2, Atom::t(ix(&[4])).unwrap()]);
        let c = Combo::term(m, rat(1, 4));
        assert_eq!(normalize(&c), c);
        assert_eq!(normalize(&Combo::zero()), Combo::zero());
    }

    #[test]
    fn monomial_keys() {
        assert_eq!(Monomial::one().key(), "1");
        let m = Monomial::from_atoms(vec![
            Atom::t(ix(&[4])).unwrap(),
            Atom::Log2,
        ]);
        assert_eq!(m.key(), "log2*t(4)");
        let sq = Monomial::from_atoms(vec![Atom::Log2, Atom::Log2]);
        assert_eq!(sq.key(), "log2^2");
        for key in ["1", "log2*t(4)", "log2^2", "t(2)*t(3)", "t(2,3)"] {
            assert_eq!(Monomial::parse_key(key).unwrap().key(), key);
        }
        assert!(Monomial::parse_key("t(1,2)").is_err());
        assert!(Monomial::parse_key("").is_err());
        assert!(Monomial::parse_key("log2^0").is_err());
    }

    #[test]
    fn combo_json_roundtrip() {
        let c = t_combo(&[3, 2])
            .add(&t_combo(&[5]).scale(&rat(1, 2)))
            .add(&Combo::term(
                Monomial::from_atoms(vec![
                    Atom::t(ix(&[2])).unwrap(),
                    Atom::t(ix(&[3])).unwrap(),
                ]),
                rat(-3, 7),
            ));
        let v = c.to_json();
        assert_eq!(Combo::from_json(&v).unwrap(), c);
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(|s| s.as_str()).collect();
        assert_eq!(keys, ["t(3,2)", "t(5)", "t(2)*t(3)"]);
    }

    #[test]
    fn combo_display() {
        let c = t_combo(&[3, 2])
            .add(&t_combo(&[5]).scale(&rat(-1, 2)))
            .add(&Combo::term(Monomial::one(), rat_int(3)));
        assert_eq!(c.to_string(), "3 + t(3,2) - 1/2*t(5)");
        assert_eq!(Combo::zero().to_string(), "0");
        assert_eq!(t_combo(&[5]).scale(&rat_int(-1)).to_string(), "-t(5)");
    }

    #[test]
    fn rational_strings() {
        assert_eq!(rat_to_string(&rat(-3, 7)), "-3/7");
        assert_eq!(rat_to_string(&rat_int(6)), "6");
        assert_eq!(rat_from_string("-3/7").unwrap(), rat(-3, 7));
        assert_eq!(rat_from_string("6").unwrap(), rat_int(6));
        assert_eq!(rat_from_string(" 5 / 16 ").unwrap(), rat(5, 16));
        assert!(rat_from_string("1/0").is_err());
        assert!(rat_from_string("x").is_err());
    }
}
