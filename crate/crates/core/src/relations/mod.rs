//! Relation engine: PSLQ discovery over evaluated constants, exact rational
//! elimination over combos, and the weight-5 derivation pipeline.
//!
//! Numeric relations are never trusted on the word of the lattice search
//! alone: every candidate is re-verified by summing the exact interval
//! enclosures, and only survives if the residual including its error bound
//! clears the acceptance threshold 10^-(D-10). Exact relations carry their
//! provenance and can be rechecked symbolically.

mod pslq;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_traits::{One, Signed, Zero};

use crate::algebra::{stuffle, AlgebraError, Atom, Combo, Monomial, Rat};
use crate::approx::{pow10, BigApprox};
use crate::eval::{EvalError, Evaluator};
use crate::index::{conjectural_basis, Index, IndexError};

#[derive(Debug, thiserror::Error)]
pub enum RelationError {
    #[error("need at least two values, got {got}")]
    TooFewValues { got: usize },
    #[error("{labels} labels for {values} values")]
    LabelCount { labels: usize, values: usize },
    #[error("value for {label} carries error above 10^-{digits}")]
    InsufficientPrecision { label: String, digits: u32 },
    #[error("expected weight {expected}, got {got}")]
    WeightMismatch { expected: u32, got: u32 },
    #[error("degenerate relation: {0}")]
    Degenerate(String),
    #[error("unknown provenance {0:?}")]
    BadProvenance(String),
    #[error("bad relations file: {0}")]
    BadRelationsFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Where an exact relation came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    PaperInput,
    Stuffle,
    Elimination,
    NumericPromoted,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Provenance::PaperInput => "paper-input",
            Provenance::Stuffle => "stuffle",
            Provenance::Elimination => "elimination",
            Provenance::NumericPromoted => "numeric-promoted",
        };
        f.write_str(s)
    }
}

impl FromStr for Provenance {
    type Err = RelationError;
    fn from_str(s: &str) -> Result<Self, RelationError> {
        match s {
            "paper-input" => Ok(Provenance::PaperInput),
            "stuffle" => Ok(Provenance::Stuffle),
            "elimination" => Ok(Provenance::Elimination),
            "numeric-promoted" => Ok(Provenance::NumericPromoted),
            _ => Err(RelationError::BadProvenance(s.to_owned())),
        }
    }
}

/// A combo asserted to vanish identically, with a record of where it came
/// from. Construction enforces nonzero and weight-homogeneous.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactRelation {
    pub combo: Combo,
    pub provenance: Provenance,
    pub source: String,
}

impl ExactRelation {
    pub fn new(
        combo: Combo,
        provenance: Provenance,
        source: impl Into<String>,
    ) -> Result<Self, RelationError> {
        if combo.is_zero() {
            return Err(RelationError::Degenerate("zero combo".to_owned()));
        }
        if combo.weight().is_none() {
            return Err(RelationError::Degenerate(
                "terms of mixed weight".to_owned(),
            ));
        }
        Ok(ExactRelation {
            combo,
            provenance,
            source: source.into(),
        })
    }

    pub fn weight(&self) -> u32 {
        self.combo.weight().expect("validated at construction")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "combo": self.combo.to_json(),
            "provenance": self.provenance.to_string(),
            "source": self.source,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, RelationError> {
        let obj = v
            .as_object()
            .ok_or_else(|| RelationError::BadRelationsFile("entry is not an object".into()))?;
        let combo = obj
            .get("combo")
            .ok_or_else(|| RelationError::BadRelationsFile("entry missing combo".into()))?;
        let combo = Combo::from_json(combo)?;
        let prov = obj
            .get("provenance")
            .and_then(|p| p.as_str())
            .ok_or_else(|| RelationError::BadRelationsFile("entry missing provenance".into()))?
            .parse::<Provenance>()?;
        let source = obj
            .get("source")
            .and_then(|s| s.as_str())
            .ok_or_else(|| RelationError::BadRelationsFile("entry missing source".into()))?;
        ExactRelation::new(combo, prov, source)
    }
}

/// An integer relation found numerically: sum(coeffs[i] * value(labels[i]))
/// verified below the acceptance threshold for `digits_used`.
#[derive(Debug, Clone)]
pub struct NumericRelation {
    pub labels: Vec<String>,
    pub coeffs: Vec<BigInt>,
    pub residual: BigApprox,
    pub digits_used: u32,
    pub coeff_bound: u64,
}

impl NumericRelation {
    /// Reassemble the relation as a combo; labels must be monomial keys.
    pub fn combo(&self) -> Result<Combo, AlgebraError> {
        let mut out = Combo::zero();
        for (label, c) in self.labels.iter().zip(&self.coeffs) {
            out.add_term(Monomial::parse_key(label)?, Rat::from_integer(c.clone()));
        }
        Ok(out)
    }
}

/// Acceptance threshold 10^-(D-10) for residuals verified at D digits.
pub fn residual_threshold(digits: u32) -> Rat {
    pow10(10 - digits as i64)
}

fn exact_residual(coeffs: &[BigInt], values: &[BigApprox]) -> BigApprox {
    let mut acc = BigApprox::zero();
    for (c, v) in coeffs.iter().zip(values) {
        if !c.is_zero() {
            acc = acc.add(&v.scale(&Rat::from_integer(c.clone())));
        }
    }
    acc
}

fn normalize_coeffs(mut v: Vec<BigInt>) -> Vec<BigInt> {
    let mut g = BigInt::zero();
    for c in &v {
        g = g.gcd(c);
    }
    if !g.is_zero() && !g.is_one() {
        for c in &mut v {
            *c /= &g;
        }
    }
    if let Some(first) = v.iter().find(|c| !c.is_zero()) {
        if first.is_negative() {
            for c in &mut v {
                *c = -&*c;
            }
        }
    }
    v
}

/// Deterministic integer relation search with exact verification.
///
/// Preconditions: at least two values, one label per value, and every error
/// bound at most 10^-digits. Candidates from the lattice search are accepted
/// only if the exact interval residual, error included, is below
/// 10^-(digits-10); rejected candidates are skipped and the search continues.
/// `Ok(None)` means the bounded search space is exhausted: no relation with
/// coefficients up to `coeff_bound` survives at this precision.
pub fn find_integer_relation(
    labels: &[String],
    values: &[BigApprox],
    digits: u32,
    coeff_bound: u64,
) -> Result<Option<NumericRelation>, RelationError> {
    if values.len() < 2 {
        return Err(RelationError::TooFewValues { got: values.len() });
    }
    if labels.len() != values.len() {
        return Err(RelationError::LabelCount {
            labels: labels.len(),
            values: values.len(),
        });
    }
    let need = pow10(-(digits as i64));
    for (label, v) in labels.iter().zip(values) {
        if v.err_abs > need {
            return Err(RelationError::InsufficientPrecision {
                label: label.clone(),
                digits,
            });
        }
    }

    let n = values.len();
    // Working precision comfortably above the data, detection tolerance at
    // roughly three quarters of the certified digits.
    let p = (digits + 15) * 10 / 3 + 64;
    let tol_bits = (digits * 5 / 2).max(8).min(p - 48);
    let max_steps = 1000 + 200 * n * n;
    let threshold = residual_threshold(digits);
    let vals: Vec<Rat> = values.iter().map(|v| v.value.clone()).collect();

    let mut verify = |coeffs: &[BigInt]| exact_residual(coeffs, values).abs_upper() < threshold;
    let found = pslq::search(
        &vals,
        p,
        tol_bits,
        &BigInt::from(coeff_bound),
        max_steps,
        &mut verify,
    );
    Ok(found.map(|raw| {
        let coeffs = normalize_coeffs(raw);
        let residual = exact_residual(&coeffs, values);
        NumericRelation {
            labels: labels.to_vec(),
            coeffs,
            residual,
            digits_used: digits,
            coeff_bound,
        }
    }))
}

/// A target expressed over the conjectural basis of its weight.
#[derive(Debug, Clone)]
pub struct BasisExpression {
    pub target: Index,
    pub weight: u32,
    /// Basis elements with nonzero rational coefficients.
    pub coefficients: Vec<(Index, Rat)>,
    /// The raw verified relation, absent when the target is itself a basis
    /// element.
    pub certificate: Option<NumericRelation>,
}

#[derive(Debug, Clone)]
pub enum ExpressOutcome {
    Expressed(BasisExpression),
    /// No relation within the searched bounds; evidence, not disproof.
    NoneFound { digits: u32, coeff_bound: u64 },
    /// The search found a relation among the basis elements alone, which
    /// contradicts conjectural independence and deserves loud reporting.
    BasisRelation(NumericRelation),
}

/// Try to write t(x) as a rational combination of the weight-k basis.
pub fn express_in_basis(
    ev: &Evaluator,
    x: &Index,
    k: u32,
    coeff_bound: u64,
) -> Result<ExpressOutcome, RelationError> {
    if x.weight() != k {
        return Err(RelationError::WeightMismatch {
            expected: k,
            got: x.weight(),
        });
    }
    let basis = conjectural_basis(k)?;
    if basis.contains(x) {
        return Ok(ExpressOutcome::Expressed(BasisExpression {
            target: x.clone(),
            weight: k,
            coefficients: vec![(x.clone(), Rat::one())],
            certificate: None,
        }));
    }
    let digits = ev.config().digits;
    let mut labels = vec![x.to_string()];
    let mut values = vec![ev.eval_index(x)?];
    for b in &basis {
        labels.push(b.to_string());
        values.push(ev.eval_index(b)?);
    }
    let rel = find_integer_relation(&labels, &values, digits, coeff_bound)?;
    let Some(rel) = rel else {
        return Ok(ExpressOutcome::NoneFound {
            digits,
            coeff_bound,
        });
    };
    let c0 = rel.coeffs[0].clone();
    if c0.is_zero() {
        return Ok(ExpressOutcome::BasisRelation(rel));
    }
    let mut coefficients = Vec::new();
    for (b, c) in basis.iter().zip(rel.coeffs[1..].iter()) {
        if !c.is_zero() {
            coefficients.push((b.clone(), -Rat::new(c.clone(), c0.clone())));
        }
    }
    Ok(ExpressOutcome::Expressed(BasisExpression {
        target: x.clone(),
        weight: k,
        coefficients,
        certificate: Some(rel),
    }))
}

/// Outcome of searching for a relation among the basis elements themselves.
#[derive(Debug, Clone)]
pub struct IndependenceReport {
    pub weight: u32,
    pub digits: u32,
    pub coeff_bound: u64,
    pub basis: Vec<Index>,
    /// `None` supports conjectural independence at these bounds.
    pub relation: Option<NumericRelation>,
}

pub fn independence_scan(
    ev: &Evaluator,
    k: u32,
    coeff_bound: u64,
) -> Result<IndependenceReport, RelationError> {
    let basis = conjectural_basis(k)?;
    let digits = ev.config().digits;
    if basis.len() < 2 {
        return Ok(IndependenceReport {
            weight: k,
            digits,
            coeff_bound,
            basis,
            relation: None,
        });
    }
    let mut labels = Vec::new();
    let mut values = Vec::new();
    for b in &basis {
        labels.push(b.to_string());
        values.push(ev.eval_index(b)?);
    }
    let relation = find_integer_relation(&labels, &values, digits, coeff_bound)?;
    Ok(IndependenceReport {
        weight: k,
        digits,
        coeff_bound,
        basis,
        relation,
    })
}

/// One solved target from `exact_eliminate`: the derived relation has
/// coefficient 1 on the target, and `lincomb` records the exact multipliers
/// such that combo == sum(lincomb[i].1 * inputs[lincomb[i].0].combo).
#[derive(Debug, Clone)]
pub struct SolvedRelation {
    pub target: Monomial,
    pub relation: ExactRelation,
    pub lincomb: Vec<(usize, Rat)>,
}

#[derive(Debug, Clone)]
pub struct Elimination {
    pub solved: Vec<SolvedRelation>,
    pub unresolved: Vec<Monomial>,
}

fn lin_sub_scaled(a: &mut [Rat], q: &Rat, b: &[Rat]) {
    for (x, y) in a.iter_mut().zip(b) {
        if !y.is_zero() {
            *x = &*x - q * y;
        }
    }
}

fn lin_scale(a: &mut [Rat], q: &Rat) {
    for x in a.iter_mut() {
        if !x.is_zero() {
            *x = &*x * q;
        }
    }
}

/// Gaussian elimination over the exact rationals.
///
/// Labels are processed in order: the `eliminate` list first, then any
/// targets not already listed. Each label takes the first input-order row
/// not yet used as a pivot; back-substitution then expresses every target
/// with coefficient 1 over the surviving labels. A target lands in
/// `unresolved` when no pivot reached it or when eliminated labels still
/// appear in its solved form. Every solved relation is rechecked
/// symbolically against its recorded linear combination of the inputs.
pub fn exact_eliminate(
    inputs: &[ExactRelation],
    eliminate: &[Monomial],
    targets: &[Monomial],
) -> Result<Elimination, RelationError> {
    let mut order: Vec<Monomial> = Vec::new();
    for m in eliminate.iter().chain(targets.iter()) {
        if !order.contains(m) {
            order.push(m.clone());
        }
    }

    struct Row {
        combo: Combo,
        lin: Vec<Rat>,
        used: bool,
    }
    let mut rows: Vec<Row> = inputs
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut lin = vec![Rat::zero(); inputs.len()];
            lin[i] = Rat::one();
            Row {
                combo: r.combo.clone(),
                lin,
                used: false,
            }
        })
        .collect();

    // Forward phase: pick pivots and clear each label from the rows that are
    // still available.
    let mut pivot_for: Vec<Option<usize>> = vec![None; order.len()];
    for (li, label) in order.iter().enumerate() {
        let Some(pi) = rows
            .iter()
            .position(|r| !r.used && !r.combo.coeff(label).is_zero())
        else {
            continue;
        };
        rows[pi].used = true;
        pivot_for[li] = Some(pi);
        let pc = rows[pi].combo.coeff(label);
        let (pcombo, plin) = (rows[pi].combo.clone(), rows[pi].lin.clone());
        for row in rows.iter_mut() {
            if row.used {
                continue;
            }
            let c = row.combo.coeff(label);
            if c.is_zero() {
                continue;
            }
            let q = &c / &pc;
            row.combo = row.combo.sub(&pcombo.scale(&q));
            lin_sub_scaled(&mut row.lin, &q, &plin);
        }
    }

    // Back substitution in reverse label order, normalizing each pivot row
    // to coefficient 1 on its label.
    let mut solved_rows: Vec<Option<(Combo, Vec<Rat>)>> = vec![None; order.len()];
    for li in (0..order.len()).rev() {
        let Some(pi) = pivot_for[li] else { continue };
        let mut combo = rows[pi].combo.clone();
        let mut lin = rows[pi].lin.clone();
        for (lj, slot) in solved_rows.iter().enumerate().skip(li + 1) {
            if let Some((scombo, slin)) = slot {
                let c = combo.coeff(&order[lj]);
                if !c.is_zero() {
                    combo = combo.sub(&scombo.scale(&c));
                    lin_sub_scaled(&mut lin, &c, slin);
                }
            }
        }
        let lead = combo.coeff(&order[li]);
        if lead.is_zero() {
            continue;
        }
        let inv = lead.recip();
        combo = combo.scale(&inv);
        lin_scale(&mut lin, &inv);
        solved_rows[li] = Some((combo, lin));
    }

    let mut solved = Vec::new();
    let mut unresolved = Vec::new();
    let mut seen_targets: Vec<&Monomial> = Vec::new();
    for t in targets {
        if seen_targets.contains(&t) {
            continue;
        }
        seen_targets.push(t);
        let li = order.iter().position(|m| m == t).expect("target in order");
        let Some((combo, lin)) = &solved_rows[li] else {
            unresolved.push(t.clone());
            continue;
        };
        if combo
            .iter()
            .any(|(m, _)| m != t && eliminate.contains(m))
        {
            unresolved.push(t.clone());
            continue;
        }
        let lincomb: Vec<(usize, Rat)> = lin
            .iter()
            .enumerate()
            .filter(|(_, q)| !q.is_zero())
            .map(|(i, q)| (i, q.clone()))
            .collect();
        // Symbolic recheck: the derived combo must equal the recorded
        // combination of the inputs identically.
        let mut recheck = Combo::zero();
        for (i, q) in &lincomb {
            recheck = recheck.add(&inputs[*i].combo.scale(q));
        }
        assert_eq!(&recheck, combo, "elimination recheck failed for {t}");
        let mut sources: Vec<&str> = Vec::new();
        for (i, _) in &lincomb {
            if !sources.contains(&inputs[*i].source.as_str()) {
                sources.push(&inputs[*i].source);
            }
        }
        let relation = ExactRelation::new(
            combo.clone(),
            Provenance::Elimination,
            format!("{} solved from {}", t.key(), sources.join("; ")),
        )?;
        solved.push(SolvedRelation {
            target: t.clone(),
            relation,
            lincomb,
        });
    }
    Ok(Elimination { solved, unresolved })
}

/// One numeric residual check inside a walkthrough.
#[derive(Debug, Clone)]
pub struct ResidualCheck {
    pub name: String,
    pub residual: BigApprox,
    pub threshold: Rat,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct WalkthroughStep {
    pub name: String,
    pub detail: String,
    pub passed: bool,
}

/// Full record of the weight-5 derivation.
#[derive(Debug, Clone)]
pub struct Walkthrough {
    pub digits: u32,
    pub steps: Vec<WalkthroughStep>,
    pub determinant: Rat,
    /// t(3,2) and t(2,1,2) over t(5) and t(2,3).
    pub rewritten: Vec<ExactRelation>,
    /// t(5), t(2,3) and t(4,1) over the weight-5 basis.
    pub in_basis: Vec<ExactRelation>,
    pub checks: Vec<ResidualCheck>,
    pub passed: bool,
}

fn mono_t(parts: &[u32]) -> Monomial {
    Monomial::t_value(Index::new(parts.to_vec()).expect("valid index")).expect("admissible")
}

/// Derive the weight-5 identities from the four input relations and verify
/// every step, exactly where possible and numerically at the end.
pub fn weight5_walkthrough(ev: &Evaluator) -> Result<Walkthrough, RelationError> {
    let digits = ev.config().digits;
    let mut steps = Vec::new();
    let mut pass = true;
    let step = |steps: &mut Vec<WalkthroughStep>, pass: &mut bool, name: &str, detail: String, ok: bool| {
        steps.push(WalkthroughStep {
            name: name.to_owned(),
            detail,
            passed: ok,
        });
        *pass &= ok;
    };

    // Step 1: the four input relations, identified by their unique leads.
    let inputs = paper_relations();
    let lead = |parts: &[u32]| -> Result<ExactRelation, RelationError> {
        let m = mono_t(parts);
        let mut found = inputs
            .iter()
            .filter(|r| !r.combo.coeff(&m).is_zero());
        let r = found
            .next()
            .ok_or_else(|| RelationError::BadRelationsFile(format!("no input containing {m}")))?;
        if found.next().is_some() {
            return Err(RelationError::BadRelationsFile(format!(
                "several inputs contain {m}"
            )));
        }
        Ok(r.clone())
    };
    let eq1a = lead(&[3, 2])?;
    let eq1b = lead(&[2, 1, 2])?;
    let eq2a = lead(&[4, 1])?;
    let eq2b = lead(&[2, 2, 1])?;
    step(
        &mut steps,
        &mut pass,
        "inputs",
        format!("{} input relations of weight 5", inputs.len()),
        inputs.len() == 4 && inputs.iter().all(|r| r.weight() == 5),
    );

    // Step 2: the stuffle fact t(2)t(3) = t(2,3) + t(3,2) + t(5).
    let i2 = Index::new(vec![2]).expect("valid");
    let i3 = Index::new(vec![3]).expect("valid");
    let x_mono = mono_t(&[2]).times(&mono_t(&[3]));
    let expansion = stuffle(&i2, &i3)?;
    let expected: Combo = [vec![2u32, 3], vec![3, 2], vec![5]]
        .iter()
        .fold(Combo::zero(), |acc, parts| {
            acc.add(&Combo::term(mono_t(parts), Rat::one()))
        });
    let fact = ExactRelation::new(
        Combo::term(x_mono.clone(), Rat::one()).sub(&expansion),
        Provenance::Stuffle,
        "stuffle t(2)*t(3)",
    )?;
    step(
        &mut steps,
        &mut pass,
        "stuffle",
        format!("t(2)*t(3) = {expansion}"),
        expansion == expected,
    );

    // Step 3: eliminate the product monomial to rewrite t(3,2), t(2,1,2)
    // over t(5) and t(2,3).
    let t32 = mono_t(&[3, 2]);
    let t212 = mono_t(&[2, 1, 2]);
    let pair_inputs = [eq1a.clone(), eq1b.clone(), fact.clone()];
    let pair = exact_eliminate(
        &pair_inputs,
        std::slice::from_ref(&x_mono),
        &[t32.clone(), t212.clone()],
    )?;
    let pair_ok = pair.unresolved.is_empty() && pair.solved.len() == 2;
    let rewritten: Vec<ExactRelation> = pair.solved.iter().map(|s| s.relation.clone()).collect();
    step(
        &mut steps,
        &mut pass,
        "rewrite",
        rewritten
            .iter()
            .map(|r| format!("{} = 0", r.combo))
            .collect::<Vec<_>>()
            .join("; "),
        pair_ok,
    );

    // Step 4: the 2x2 coefficient matrix of the rewritten pair in the
    // coordinates (t(5), t(2,3)) must be invertible.
    let t5 = mono_t(&[5]);
    let t23 = mono_t(&[2, 3]);
    let coord = |r: &ExactRelation| (-r.combo.coeff(&t5), -r.combo.coeff(&t23));
    let determinant = if pair_ok {
        let (a, b) = coord(&rewritten[0]);
        let (c, d) = coord(&rewritten[1]);
        &a * &d - &b * &c
    } else {
        Rat::zero()
    };
    step(
        &mut steps,
        &mut pass,
        "determinant",
        format!("det = {}", crate::algebra::rat_to_string(&determinant)),
        !determinant.is_zero(),
    );

    // Step 5: invert the pair to express t(5) and t(2,3) over the basis.
    let inverted = exact_eliminate(&rewritten, &[], &[t5.clone(), t23.clone()])?;
    let inverted_ok = inverted.unresolved.is_empty() && inverted.solved.len() == 2;
    let mut in_basis: Vec<ExactRelation> =
        inverted.solved.iter().map(|s| s.relation.clone()).collect();
    step(
        &mut steps,
        &mut pass,
        "invert",
        in_basis
            .iter()
            .map(|r| format!("{} = 0", r.combo))
            .collect::<Vec<_>>()
            .join("; "),
        inverted_ok,
    );

    // Step 6: push t(4,1) down to the basis, eliminating the logarithmic
    // monomial, the product, and the two rewritten depth-lowerings.
    let l_mono = Monomial::from_atoms(vec![
        Atom::Log2,
        Atom::t(Index::new(vec![4]).expect("valid")).expect("admissible"),
    ]);
    let t41 = mono_t(&[4, 1]);
    let mut t41_inputs = vec![eq2a.clone(), eq2b.clone(), fact.clone()];
    t41_inputs.extend(in_basis.iter().cloned());
    let t41_elim = exact_eliminate(
        &t41_inputs,
        &[l_mono.clone(), x_mono.clone(), t5.clone(), t23.clone()],
        std::slice::from_ref(&t41),
    )?;
    let t41_ok = t41_elim.unresolved.is_empty() && t41_elim.solved.len() == 1;
    step(
        &mut steps,
        &mut pass,
        "depth-reduce",
        t41_elim
            .solved
            .iter()
            .map(|s| format!("{} = 0", s.relation.combo))
            .collect::<Vec<_>>()
            .join("; "),
        t41_ok,
    );
    in_basis.extend(t41_elim.solved.iter().map(|s| s.relation.clone()));

    // Step 7: numeric verification of everything, inputs included.
    let threshold = residual_threshold(digits);
    let mut checks = Vec::new();
    let named: Vec<(String, &ExactRelation)> = [
        (&eq1a, "3,2"),
        (&eq1b, "2,1,2"),
        (&eq2a, "4,1"),
        (&eq2b, "2,2,1"),
    ]
    .iter()
    .map(|(r, parts)| (format!("input t({parts})"), *r))
    .chain(std::iter::once((
        "stuffle t(2)*t(3)".to_owned(),
        &fact,
    )))
    .chain(
        rewritten
            .iter()
            .zip(["t(3,2)", "t(2,1,2)"])
            .map(|(r, n)| (format!("derived {n}"), r)),
    )
    .chain(
        in_basis
            .iter()
            .zip(["t(5)", "t(2,3)", "t(4,1)"])
            .map(|(r, n)| (format!("derived {n}"), r)),
    )
    .collect();
    let mut all_checked = true;
    for (name, rel) in named {
        let residual = ev.eval_combo(&rel.combo)?;
        let ok = residual.abs_upper() < threshold;
        all_checked &= ok;
        checks.push(ResidualCheck {
            name,
            residual,
            threshold: threshold.clone(),
            passed: ok,
        });
    }
    step(
        &mut steps,
        &mut pass,
        "verify",
        format!(
            "{} residuals checked against 10^-({} - 10)",
            checks.len(),
            digits
        ),
        all_checked,
    );

    Ok(Walkthrough {
        digits,
        steps,
        determinant,
        rewritten,
        in_basis,
        checks,
        passed: pass,
    })
}

fn parse_relations_json(text: &str) -> Result<Vec<ExactRelation>, RelationError> {
    let v: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| RelationError::BadRelationsFile(e.to_string()))?;
    let arr = v
        .as_array()
        .ok_or_else(|| RelationError::BadRelationsFile("expected a JSON array".into()))?;
    arr.iter().map(ExactRelation::from_json).collect()
}

/// The four input relations shipped with the crate.
pub fn paper_relations() -> Vec<ExactRelation> {
    parse_relations_json(include_str!("../../data/paper_relations.json"))
        .expect("embedded relations are valid")
}

/// Load a relations file in the same format as the shipped one.
pub fn load_relations_file(path: &Path) -> Result<Vec<ExactRelation>, RelationError> {
    let text = std::fs::read_to_string(path)?;
    parse_relations_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, rat_int};

    fn approx(v: Rat) -> BigApprox {
        BigApprox::new(v, pow10(-80))
    }

    #[test]
    fn shipped_relations_parse_and_validate() {
        let rels = paper_relations();
        assert_eq!(rels.len(), 4);
        for r in &rels {
            assert_eq!(r.weight(), 5);
            assert_eq!(r.provenance, Provenance::PaperInput);
            assert!(r.source.starts_with("Eq."));
        }
        // Round trip through JSON.
        let back = ExactRelation::from_json(&rels[0].to_json()).unwrap();
        assert_eq!(back, rels[0]);
    }

    #[test]
    fn construction_rejects_degenerate_combos() {
        assert!(matches!(
            ExactRelation::new(Combo::zero(), Provenance::Stuffle, "x"),
            Err(RelationError::Degenerate(_))
        ));
        let mixed = Combo::term(mono_t(&[2]), Rat::one())
            .add(&Combo::term(mono_t(&[3]), Rat::one()));
        assert!(matches!(
            ExactRelation::new(mixed, Provenance::Stuffle, "x"),
            Err(RelationError::Degenerate(_))
        ));
    }

    #[test]
    fn finds_and_normalizes_simple_relation() {
        let labels = vec!["a".to_owned(), "b".to_owned()];
        let values = vec![approx(rat_int(1)), approx(rat(1, 2))];
        let rel = find_integer_relation(&labels, &values, 50, 1000)
            .unwrap()
            .expect("relation exists");
        assert_eq!(rel.coeffs, vec![BigInt::from(1), BigInt::from(-2)]);
        assert!(rel.residual.abs_upper() < residual_threshold(50));
        assert_eq!(rel.digits_used, 50);
        assert_eq!(rel.coeff_bound, 1000);
    }

    #[test]
    fn scaling_both_values_keeps_the_relation() {
        let labels = vec!["a".to_owned(), "b".to_owned()];
        let base = vec![approx(rat(3, 7)), approx(rat(9, 14))];
        let doubled: Vec<BigApprox> = base.iter().map(|v| v.scale(&rat_int(2))).collect();
        let r1 = find_integer_relation(&labels, &base, 50, 1000)
            .unwrap()
            .unwrap();
        let r2 = find_integer_relation(&labels, &doubled, 50, 1000)
            .unwrap()
            .unwrap();
        assert_eq!(r1.coeffs, r2.coeffs);
        assert_eq!(r1.coeffs, vec![BigInt::from(3), BigInt::from(-2)]);
    }

    #[test]
    fn preconditions_are_enforced() {
        let labels = vec!["a".to_owned()];
        let values = vec![approx(rat_int(1))];
        assert!(matches!(
            find_integer_relation(&labels, &values, 50, 1000),
            Err(RelationError::TooFewValues { got: 1 })
        ));
        let labels = vec!["a".to_owned(), "b".to_owned()];
        let sloppy = vec![
            BigApprox::new(rat_int(1), pow10(-20)),
            approx(rat(1, 2)),
        ];
        assert!(matches!(
            find_integer_relation(&labels, &sloppy, 50, 1000),
            Err(RelationError::InsufficientPrecision { .. })
        ));
    }

    #[test]
    fn elimination_inverts_the_rewritten_pair() {
        // t(3,2) + (1/8)t(5) - (3/4)t(2,3) and t(2,1,2) - (5/16)t(5) + (7/8)t(2,3).
        let t5 = mono_t(&[5]);
        let t23 = mono_t(&[2, 3]);
        let t32 = mono_t(&[3, 2]);
        let t212 = mono_t(&[2, 1, 2]);
        let r1 = ExactRelation::new(
            Combo::term(t32.clone(), rat_int(1))
                .add(&Combo::term(t5.clone(), rat(1, 8)))
                .add(&Combo::term(t23.clone(), rat(-3, 4))),
            Provenance::Elimination,
            "r1",
        )
        .unwrap();
        let r2 = ExactRelation::new(
            Combo::term(t212.clone(), rat_int(1))
                .add(&Combo::term(t5.clone(), rat(-5, 16)))
                .add(&Combo::term(t23.clone(), rat(7, 8))),
            Provenance::Elimination,
            "r2",
        )
        .unwrap();
        let out = exact_eliminate(&[r1.clone(), r2.clone()], &[], &[t5.clone(), t23.clone()])
            .unwrap();
        assert!(out.unresolved.is_empty());
        let t5_combo = &out.solved[0].relation.combo;
        assert_eq!(t5_combo.coeff(&t5), rat_int(1));
        assert_eq!(t5_combo.coeff(&t32), rat_int(-7));
        assert_eq!(t5_combo.coeff(&t212), rat_int(-6));
        let t23_combo = &out.solved[1].relation.combo;
        assert_eq!(t23_combo.coeff(&t23), rat_int(1));
        assert_eq!(t23_combo.coeff(&t32), rat(-5, 2));
        assert_eq!(t23_combo.coeff(&t212), rat_int(-1));
        // Linear combinations reconstruct the derived combos from the inputs.
        for s in &out.solved {
            let mut acc = Combo::zero();
            for (i, q) in &s.lincomb {
                acc = acc.add(&[&r1, &r2][*i].combo.scale(q));
            }
            assert_eq!(acc, s.relation.combo);
        }
    }

    #[test]
    fn unreachable_targets_are_reported() {
        let t5 = mono_t(&[5]);
        let t23 = mono_t(&[2, 3]);
        let r = ExactRelation::new(
            Combo::term(t5.clone(), rat_int(1)).add(&Combo::term(t23.clone(), rat_int(-2))),
            Provenance::Stuffle,
            "only",
        )
        .unwrap();
        // One equation cannot solve for both labels.
        let out = exact_eliminate(&[r], &[], &[t5.clone(), t23.clone()]).unwrap();
        assert_eq!(out.solved.len(), 1);
        assert_eq!(out.unresolved, vec![t23]);
    }

    #[test]
    fn provenance_strings_round_trip() {
        for p in [
            Provenance::PaperInput,
            Provenance::Stuffle,
            Provenance::Elimination,
            Provenance::NumericPromoted,
        ] {
            assert_eq!(p.to_string().parse::<Provenance>().unwrap(), p);
        }
        assert!("guesswork".parse::<Provenance>().is_err());
    }
}
