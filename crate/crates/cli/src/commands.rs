//! The four subcommands: enumeration, single evaluation, the published-check
//! pipeline, and the weight scan.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_traits::{One, Signed, Zero};
use serde_json::json;

use tforge_core::algebra::{rat_to_string, AlgebraError, Atom, Combo, Monomial, Rat};
use tforge_core::approx::{ceil_log10, BigApprox};
use tforge_core::eval::{Backend, EvalConfig, EvalError};
use tforge_core::index::{
    admissible_indices, compositions, conjectural_basis, is_polar, predicted_dims, Hyperplane,
    Index, IndexError,
};
use tforge_core::relations::{
    express_in_basis, independence_scan, load_relations_file, paper_relations, residual_threshold,
    weight5_walkthrough, ExactRelation, ExpressOutcome, RelationError,
};
use tforge_core::Evaluator;

use crate::report::{RunReport, Status};

/// Enumeration above this weight would print millions of rows.
const MAX_BASIS_WEIGHT: u32 = 30;
const MAX_SCAN_WEIGHT: u32 = 10;

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or inputs; exit code 2.
    Usage(String),
    /// The precision target could not be met; exit code 3.
    Precision(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Precision(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Precision(m) => f.write_str(m),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::PrecisionUnreachable(_) => CliError::Precision(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<IndexError> for CliError {
    fn from(e: IndexError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<AlgebraError> for CliError {
    fn from(e: AlgebraError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<RelationError> for CliError {
    fn from(e: RelationError) -> Self {
        match e {
            RelationError::InsufficientPrecision { .. } => CliError::Precision(e.to_string()),
            RelationError::Eval(inner) => inner.into(),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

/// Accepts both "2,1,2" and "t(2,1,2)".
pub fn parse_index(raw: &str) -> Result<Index, CliError> {
    let s = raw.trim();
    let body = match s.strip_prefix("t(") {
        Some(rest) => rest
            .strip_suffix(')')
            .ok_or_else(|| CliError::Usage(format!("unclosed index {s:?}")))?,
        None => s,
    };
    let mut parts = Vec::new();
    for piece in body.split(',') {
        let piece = piece.trim();
        let p: u32 = piece.parse().map_err(|_| {
            CliError::Usage(format!("cannot parse {piece:?} in index {raw:?}"))
        })?;
        parts.push(p);
    }
    Ok(Index::new(parts)?)
}

fn require_admissible(a: &Index) -> Result<(), CliError> {
    if a.is_admissible() {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "index {a} is not admissible: the series only converges for a_1 >= 2"
        )))
    }
}

fn evaluator(
    digits: u32,
    backend: Backend,
    cutoff: u64,
    cache: Option<PathBuf>,
    time_budget: Option<u64>,
) -> Result<Evaluator, CliError> {
    Ok(Evaluator::new(EvalConfig {
        digits,
        backend,
        oracle_cutoff: cutoff,
        cache_path: cache,
        time_budget: time_budget.map(Duration::from_secs),
    })?)
}

fn emit_counters(ev: &Evaluator, verbose: bool) {
    if verbose {
        let c = ev.counters();
        eprintln!(
            "backend_calls={} cache_hits_mem={} cache_hits_disk={} cache_errors={}",
            c.backend_calls, c.cache_hits_mem, c.cache_hits_disk, c.cache_errors
        );
    }
}

/// Evaluate a batch of atoms across a worker pool to fill the memo table.
/// Errors are ignored here; the serial pass that reads the results surfaces
/// them deterministically.
fn prewarm(ev: &Evaluator, atoms: &[Atom], jobs: usize) {
    if jobs < 2 || atoms.len() < 2 {
        return;
    }
    std::thread::scope(|scope| {
        for worker in 0..jobs.min(atoms.len()) {
            scope.spawn(move || {
                for a in atoms.iter().skip(worker).step_by(jobs) {
                    let _ = ev.eval_atom(a);
                }
            });
        }
    });
}

fn residual_exp(v: &BigApprox) -> Option<i64> {
    let up = v.abs_upper();
    if up.is_zero() {
        None
    } else {
        Some(ceil_log10(&up))
    }
}

fn coeff_prefix(mag: &Rat) -> String {
    if mag.is_one() {
        String::new()
    } else if mag.is_integer() {
        mag.to_string()
    } else {
        format!("({})", rat_to_string(mag))
    }
}

/// "t(5) = 7t(3,2) + 6t(2,1,2)" style rendering of a basis expression.
fn expression_text(target: &Index, coeffs: &[(Index, Rat)]) -> String {
    let mut out = format!("{target} = ");
    if coeffs.is_empty() {
        out.push('0');
        return out;
    }
    for (i, (b, q)) in coeffs.iter().enumerate() {
        let neg = q.is_negative();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        out.push_str(&coeff_prefix(&q.abs()));
        out.push_str(&b.to_string());
    }
    out
}

pub fn basis(weight: u32, mzv: bool) -> Result<RunReport, CliError> {
    let started = Instant::now();
    if weight < 2 {
        return Err(CliError::Usage(format!(
            "weight {weight} is below the minimum of 2"
        )));
    }
    if weight > MAX_BASIS_WEIGHT {
        return Err(CliError::Usage(format!(
            "weight {weight} exceeds the listing cap of {MAX_BASIS_WEIGHT}; the row count grows exponentially"
        )));
    }
    let (fib, mzv_dim) = predicted_dims(weight)?;
    let mut text = String::new();
    let results;
    if mzv {
        let comps = compositions(weight, &[2, 3])?;
        for c in &comps {
            let parts: Vec<String> = c.iter().map(|p| p.to_string()).collect();
            text.push_str(&format!("({})\n", parts.join(",")));
        }
        text.push_str(&format!("count={}, d_{}={}\n", comps.len(), weight, mzv_dim));
        results = json!({
            "weight": weight,
            "mzv": true,
            "compositions": comps,
            "count": comps.len(),
            "predicted": { "fibonacci": fib, "mzv_dim": mzv_dim },
        });
    } else {
        let basis = conjectural_basis(weight)?;
        for b in &basis {
            text.push_str(&format!("{b}\n"));
        }
        text.push_str(&format!("count={}, F_{}={}\n", basis.len(), weight, fib));
        text.push_str(&format!(
            "predicted_dims: F_{}={}, d_{}={}\n",
            weight, fib, weight, mzv_dim
        ));
        let parts: Vec<&[u32]> = basis.iter().map(|b| b.parts()).collect();
        results = json!({
            "weight": weight,
            "mzv": false,
            "indices": parts,
            "count": basis.len(),
            "predicted": { "fibonacci": fib, "mzv_dim": mzv_dim },
        });
    }
    Ok(RunReport {
        command: "basis",
        config: json!({ "weight": weight, "mzv": mzv }),
        status: Status::Pass,
        results,
        text,
        timing_ms: started.elapsed().as_millis(),
    })
}

#[allow(clippy::too_many_arguments)]
pub fn eval(
    raw_index: &str,
    digits: u32,
    backend: Backend,
    cutoff: u64,
    cache: Option<PathBuf>,
    time_budget: Option<u64>,
    verbose: bool,
) -> Result<RunReport, CliError> {
    let started = Instant::now();
    let a = parse_index(raw_index)?;
    require_admissible(&a)?;
    let ev = evaluator(digits, backend, cutoff, cache, time_budget)?;
    let v = ev.eval_index(&a)?;
    emit_counters(&ev, verbose);

    let decimal = v.to_decimal(digits);
    let err_exp = v.err_exponent();
    let mut text = format!("{a} = {decimal}\n");
    match err_exp {
        Some(e) => text.push_str(&format!("err <= 10^{e}\n")),
        None => text.push_str("err = 0\n"),
    }
    Ok(RunReport {
        command: "eval",
        config: json!({
            "index": a.to_string(),
            "digits": digits,
            "backend": backend.to_string(),
            "cutoff": cutoff,
        }),
        status: Status::Pass,
        results: json!({
            "label": a.to_string(),
            "parts": a.parts(),
            "value": decimal,
            "err_exp": err_exp,
        }),
        text,
        timing_ms: started.elapsed().as_millis(),
    })
}

struct Check {
    name: String,
    passed: bool,
    detail: String,
}

struct ResidualRow {
    name: String,
    exponent: Option<i64>,
    threshold_exponent: i64,
    passed: bool,
}

fn check_line(ok: bool, name: &str, detail: &str) -> String {
    let mark = if ok { "ok" } else { "FAIL" };
    if detail.is_empty() {
        format!("{mark} {name}\n")
    } else {
        format!("{mark} {name}: {detail}\n")
    }
}

fn listed_basis() -> [(u32, Vec<Index>); 3] {
    let ix = |parts: &[u32]| Index::new(parts.to_vec()).expect("listed index");
    [
        (3, vec![ix(&[2, 1]), ix(&[3])]),
        (4, vec![ix(&[2, 1, 1]), ix(&[2, 2]), ix(&[3, 1])]),
        (
            5,
            vec![
                ix(&[2, 1, 1, 1]),
                ix(&[2, 1, 2]),
                ix(&[2, 2, 1]),
                ix(&[3, 1, 1]),
                ix(&[3, 2]),
            ],
        ),
    ]
}

fn relation_atoms(rels: &[ExactRelation]) -> Vec<Atom> {
    let mut atoms: Vec<Atom> = Vec::new();
    for r in rels {
        for (m, _) in r.combo.iter() {
            for a in m.atoms() {
                if !atoms.contains(a) {
                    atoms.push(a.clone());
                }
            }
        }
    }
    atoms
}

pub fn verify_paper(
    digits: u32,
    relations: Option<PathBuf>,
    jobs: usize,
    cache: Option<PathBuf>,
    time_budget: Option<u64>,
    verbose: bool,
) -> Result<RunReport, CliError> {
    let started = Instant::now();
    let rels = match &relations {
        Some(path) => load_relations_file(path)?,
        None => paper_relations(),
    };
    let ev = evaluator(digits, Backend::Fast, 100_000, cache, time_budget)?;
    let threshold = residual_threshold(digits);
    let threshold_exponent = 10 - digits as i64;
    let mut checks: Vec<Check> = Vec::new();
    let mut residuals: Vec<ResidualRow> = Vec::new();

    // Exact listings.
    for (k, want) in listed_basis() {
        let got = conjectural_basis(k)?;
        let listing: Vec<String> = got.iter().map(|b| b.to_string()).collect();
        checks.push(Check {
            name: format!("C_{k} listing"),
            passed: got == want,
            detail: listing.join(", "),
        });
    }

    // Count recurrences to weight 20.
    let mut f = [0u64; 21];
    (f[2], f[3]) = (1, 2);
    let mut d = [0u64; 21];
    (d[2], d[3], d[4]) = (1, 1, 1);
    for k in 4..=20 {
        f[k] = f[k - 1] + f[k - 2];
        if k >= 5 {
            d[k] = d[k - 2] + d[k - 3];
        }
    }
    let mut counts_ok = true;
    for k in 2..=20u32 {
        counts_ok &= conjectural_basis(k)?.len() as u64 == f[k as usize];
        counts_ok &= compositions(k, &[2, 3])?.len() as u64 == d[k as usize];
    }
    checks.push(Check {
        name: "counts to weight 20".into(),
        passed: counts_ok,
        detail: format!("F_20={}, d_20={}", f[20], d[20]),
    });

    // Polar hyperplane table, depth <= 4, shift <= 10.
    let mut polar_ok = true;
    for r in 1..=4u32 {
        for i in 1..=r {
            for k in 0..=10u32 {
                let expected = match i {
                    1 => k == 0,
                    2 => k == 1 || k % 2 == 0,
                    _ => true,
                };
                polar_ok &= is_polar(r, Hyperplane::new(i, k)?)? == expected;
            }
        }
    }
    checks.push(Check {
        name: "polar table".into(),
        passed: polar_ok,
        detail: "H(1,0); H(2,1) and even shifts; all of i >= 3".into(),
    });

    // Prewarm every atom the numeric checks will need.
    let mut atoms = relation_atoms(&rels);
    for parts in [
        vec![2u32],
        vec![3],
        vec![2, 3],
        vec![3, 2],
        vec![5],
        vec![2, 1, 2],
        vec![2, 2, 1],
        vec![4, 1],
    ] {
        let a = Atom::t(Index::new(parts).expect("valid index"))?;
        if !atoms.contains(&a) {
            atoms.push(a);
        }
    }
    prewarm(&ev, &atoms, jobs);

    // Stuffle fact residual.
    let t = |parts: &[u32]| -> Result<Combo, CliError> {
        Ok(Combo::t_value(Index::new(parts.to_vec())?)?)
    };
    let product = Combo::term(
        Monomial::parse_key("t(2)*t(3)")?,
        Rat::from_integer(1.into()),
    );
    let fact = product
        .sub(&t(&[2, 3])?)
        .sub(&t(&[3, 2])?)
        .sub(&t(&[5])?);
    let v = ev.eval_combo(&fact)?;
    residuals.push(ResidualRow {
        name: "stuffle fact t(2)*t(3)".into(),
        exponent: residual_exp(&v),
        threshold_exponent,
        passed: v.is_below(&threshold),
    });

    // Input relation residuals.
    for (i, r) in rels.iter().enumerate() {
        let v = ev.eval_combo(&r.combo)?;
        residuals.push(ResidualRow {
            name: format!("relation {}: {}", i + 1, r.source),
            exponent: residual_exp(&v),
            threshold_exponent,
            passed: v.is_below(&threshold),
        });
    }

    // The weight-5 derivation, step by step.
    let w = weight5_walkthrough(&ev)?;
    for s in &w.steps {
        checks.push(Check {
            name: format!("walkthrough {}", s.name),
            passed: s.passed,
            detail: s.detail.clone(),
        });
    }
    checks.push(Check {
        name: "walkthrough determinant nonzero".into(),
        passed: !w.determinant.is_zero(),
        detail: rat_to_string(&w.determinant),
    });
    for c in &w.checks {
        residuals.push(ResidualRow {
            name: format!("walkthrough {}", c.name),
            exponent: residual_exp(&c.residual),
            threshold_exponent,
            passed: c.passed,
        });
    }
    let derived: Vec<String> = w
        .rewritten
        .iter()
        .chain(w.in_basis.iter())
        .map(|r| format!("{} = 0", r.combo))
        .collect();

    emit_counters(&ev, verbose);

    let all_passed =
        checks.iter().all(|c| c.passed) && residuals.iter().all(|r| r.passed);
    let mut text = String::new();
    for c in &checks {
        text.push_str(&check_line(c.passed, &c.name, &c.detail));
    }
    for r in &residuals {
        let detail = match r.exponent {
            Some(e) => format!(
                "residual <= 10^{e} (threshold 10^{})",
                r.threshold_exponent
            ),
            None => format!("residual = 0 (threshold 10^{})", r.threshold_exponent),
        };
        text.push_str(&check_line(r.passed, &r.name, &detail));
    }
    for line in &derived {
        text.push_str(&format!("derived {line}\n"));
    }

    let results = json!({
        "checks": checks
            .iter()
            .map(|c| json!({ "name": c.name, "passed": c.passed, "detail": c.detail }))
            .collect::<Vec<_>>(),
        "residuals": residuals
            .iter()
            .map(|r| json!({
                "name": r.name,
                "exponent": r.exponent,
                "threshold_exponent": r.threshold_exponent,
                "passed": r.passed,
            }))
            .collect::<Vec<_>>(),
        "derived": derived,
        "determinant": rat_to_string(&w.determinant),
    });
    Ok(RunReport {
        command: "verify-paper",
        config: json!({
            "digits": digits,
            "relations": relations
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_else(|| "embedded".into()),
            "jobs": jobs,
        }),
        status: if all_passed { Status::Pass } else { Status::Fail },
        results,
        text,
        timing_ms: started.elapsed().as_millis(),
    })
}

pub fn scan(
    weight: u32,
    digits: u32,
    coeff_bound: u64,
    jobs: usize,
    cache: Option<PathBuf>,
    time_budget: Option<u64>,
    verbose: bool,
) -> Result<RunReport, CliError> {
    let started = Instant::now();
    if !(2..=MAX_SCAN_WEIGHT).contains(&weight) {
        return Err(CliError::Usage(format!(
            "scan weight must lie in 2..={MAX_SCAN_WEIGHT}, got {weight}"
        )));
    }
    let ev = evaluator(digits, Backend::Fast, 100_000, cache, time_budget)?;
    let basis = conjectural_basis(weight)?;
    let admissible = admissible_indices(weight)?;

    let mut atoms: Vec<Atom> = Vec::new();
    for a in basis.iter().chain(admissible.iter()) {
        let atom = Atom::t(a.clone())?;
        if !atoms.contains(&atom) {
            atoms.push(atom);
        }
    }
    prewarm(&ev, &atoms, jobs);

    let independence = independence_scan(&ev, weight, coeff_bound)?;
    let mut text = String::new();
    let basis_listing: Vec<String> = basis.iter().map(|b| b.to_string()).collect();
    text.push_str(&format!(
        "basis C_{}: {} ({} elements)\n",
        weight,
        basis_listing.join(", "),
        basis.len()
    ));
    let independence_json;
    let mut failed = false;
    match &independence.relation {
        None => {
            text.push_str(&format!(
                "independence: no relation with |c| <= {coeff_bound} at {digits} digits\n"
            ));
            independence_json = json!({ "relation": null, "coeff_bound": coeff_bound });
        }
        Some(rel) => {
            failed = true;
            let combo = rel.combo()?;
            text.push_str(&format!(
                "independence: FOUND {} = 0 inside the basis (conjecture violated?)\n",
                combo
            ));
            independence_json = json!({
                "relation": {
                    "labels": rel.labels,
                    "coeffs": rel.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                    "residual_exp": residual_exp(&rel.residual),
                },
                "coeff_bound": coeff_bound,
            });
        }
    }

    let mut rows = Vec::new();
    let mut misses: Vec<String> = Vec::new();
    for a in &admissible {
        match express_in_basis(&ev, a, weight, coeff_bound)? {
            ExpressOutcome::Expressed(e) => {
                let expr = expression_text(&e.target, &e.coefficients);
                let (provenance, exp) = match &e.certificate {
                    None => ("basis", None),
                    Some(cert) => ("pslq", residual_exp(&cert.residual)),
                };
                match exp {
                    Some(exp) => text.push_str(&format!(
                        "{expr}   [{provenance}, residual <= 10^{exp}]\n"
                    )),
                    None => text.push_str(&format!("{expr}   [{provenance}]\n")),
                }
                rows.push(json!({
                    "target": e.target.to_string(),
                    "expression": expr,
                    "coefficients": e.coefficients
                        .iter()
                        .map(|(b, q)| json!([b.to_string(), rat_to_string(q)]))
                        .collect::<Vec<_>>(),
                    "provenance": provenance,
                    "residual_exp": exp,
                }));
            }
            ExpressOutcome::NoneFound { digits, coeff_bound } => {
                text.push_str(&format!(
                    "{a}: no relation within |c| <= {coeff_bound} at {digits} digits\n"
                ));
                misses.push(a.to_string());
            }
            ExpressOutcome::BasisRelation(rel) => {
                failed = true;
                let combo = rel.combo()?;
                text.push_str(&format!(
                    "{a}: search degenerated to a basis relation {combo} = 0\n"
                ));
                misses.push(a.to_string());
            }
        }
    }
    emit_counters(&ev, verbose);

    let status = if failed {
        Status::Fail
    } else if misses.is_empty() {
        Status::Pass
    } else {
        Status::NoneFound
    };
    let results = json!({
        "weight": weight,
        "basis": basis_listing,
        "independence": independence_json,
        "rows": rows,
        "misses": misses,
    });
    Ok(RunReport {
        command: "scan",
        config: json!({
            "weight": weight,
            "digits": digits,
            "coeff_bound": coeff_bound,
            "jobs": jobs,
        }),
        status,
        results,
        text,
        timing_ms: started.elapsed().as_millis(),
    })
}
