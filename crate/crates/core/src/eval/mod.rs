//! Arbitrary-precision evaluation of t-values, Log2, and Combos.
//!
//! The fast backend expands each t-value over sign vectors into alternating
//! sums and evaluates their words by path splitting at 1/2; the oracle
//! backend sums the defining series directly and wears its tail bound as the
//! error. Either way every result is a [`BigApprox`] whose interval contains
//! the true value.

pub mod cache;
pub(crate) mod fx;
pub mod oracle;
pub mod words;
pub mod zeta;

pub use cache::CacheEntry;
pub use oracle::SummationForm;
pub use words::{sign_expansion, SignExpansion};

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use thiserror::Error;

use crate::algebra::{Atom, Combo, Rat};
use crate::approx::{ceil_log10, parse_decimal, pow10, BigApprox};
use crate::index::Index;

/// Hard ceiling on requested digits; higher precision is out of scope.
pub const MAX_DIGITS: u32 = 200;
/// Fast-backend depth limit: the sign expansion has 2^depth words.
pub const MAX_FAST_DEPTH: usize = 16;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("index {0} is not admissible: the leading part must be at least 2")]
    NotAdmissible(Index),
    #[error("digits {digits} outside the supported range 1..={max}")]
    DigitsOutOfRange { digits: u32, max: u32 },
    #[error("oracle cutoff {n_terms} is below the depth {depth} of the index")]
    CutoffBelowDepth { n_terms: u64, depth: usize },
    #[error("depth {depth} exceeds the fast-backend limit of {max}")]
    DepthTooLarge { depth: usize, max: usize },
    #[error("requested precision unreachable: {0}")]
    PrecisionUnreachable(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Fast,
    Oracle,
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Backend::Fast => "fast",
            Backend::Oracle => "oracle",
        })
    }
}

impl std::str::FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fast" => Ok(Backend::Fast),
            "oracle" => Ok(Backend::Oracle),
            other => Err(format!("unknown backend {other:?}, expected fast or oracle")),
        }
    }
}

/// Evaluation settings: precision target, backend, work limits, cache root.
#[derive(Clone, Debug)]
pub struct EvalConfig {
    /// Requested correct decimal digits D.
    pub digits: u32,
    pub backend: Backend,
    /// Outer terms for the oracle backend: odd n_1 up to 2N-1.
    pub oracle_cutoff: u64,
    /// Disk cache root; None disables the disk cache. The TFORGE_CACHE
    /// environment variable overrides this when set and non-empty.
    pub cache_path: Option<PathBuf>,
    pub time_budget: Option<Duration>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            digits: 50,
            backend: Backend::Fast,
            oracle_cutoff: 100_000,
            cache_path: None,
            time_budget: None,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.digits < 1 || self.digits > MAX_DIGITS {
            return Err(EvalError::DigitsOutOfRange {
                digits: self.digits,
                max: MAX_DIGITS,
            });
        }
        if self.oracle_cutoff < 1 {
            return Err(EvalError::PrecisionUnreachable(
                "oracle cutoff must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Working mantissa bits: D + 10 guard digits plus depth-dependent slack.
pub fn working_bits(digits: u32, depth: usize) -> u32 {
    (digits + 10 + depth as u32) * 10 / 3 + 32
}

/// Observable work counters, mainly for --verbose output and cache tests.
#[derive(Clone, Copy, Debug, Default, serde::Serialize)]
pub struct EvalCounters {
    pub backend_calls: u64,
    pub cache_hits_mem: u64,
    pub cache_hits_disk: u64,
    pub cache_errors: u64,
}

/// Shared evaluation context: config, memo tables, disk cache, counters.
/// All methods take &self and are safe to call concurrently.
pub struct Evaluator {
    cfg: EvalConfig,
    disk: Option<cache::Cache>,
    mem: Mutex<BTreeMap<Index, BigApprox>>,
    log2_memo: Mutex<Option<BigApprox>>,
    backend_calls: AtomicU64,
    cache_hits_mem: AtomicU64,
    cache_hits_disk: AtomicU64,
    cache_errors: AtomicU64,
}

impl Evaluator {
    pub fn new(cfg: EvalConfig) -> Result<Self, EvalError> {
        cfg.validate()?;
        let disk = match std::env::var_os("TFORGE_CACHE") {
            Some(path) if !path.is_empty() => Some(cache::Cache::new(PathBuf::from(path))),
            _ => cfg.cache_path.clone().map(cache::Cache::new),
        };
        Ok(Evaluator {
            cfg,
            disk,
            mem: Mutex::new(BTreeMap::new()),
            log2_memo: Mutex::new(None),
            backend_calls: AtomicU64::new(0),
            cache_hits_mem: AtomicU64::new(0),
            cache_hits_disk: AtomicU64::new(0),
            cache_errors: AtomicU64::new(0),
        })
    }

    pub fn config(&self) -> &EvalConfig {
        &self.cfg
    }

    pub fn counters(&self) -> EvalCounters {
        EvalCounters {
            backend_calls: self.backend_calls.load(Ordering::Relaxed),
            cache_hits_mem: self.cache_hits_mem.load(Ordering::Relaxed),
            cache_hits_disk: self.cache_hits_disk.load(Ordering::Relaxed),
            cache_errors: self.cache_errors.load(Ordering::Relaxed),
        }
    }

    fn deadline(&self) -> Option<Instant> {
        self.cfg.time_budget.map(|b| Instant::now() + b)
    }

    fn check_deadline(&self, deadline: Option<Instant>) -> Result<(), EvalError> {
        match deadline {
            Some(d) if Instant::now() >= d => Err(EvalError::PrecisionUnreachable(
                "time budget exhausted before reaching the precision target".into(),
            )),
            _ => Ok(()),
        }
    }

    pub fn eval_atom(&self, x: &Atom) -> Result<BigApprox, EvalError> {
        match x {
            Atom::T(a) => self.eval_index(a),
            Atom::Log2 => {
                if let Some(v) = self.log2_memo.lock().expect("memo lock").clone() {
                    self.cache_hits_mem.fetch_add(1, Ordering::Relaxed);
                    return Ok(v);
                }
                self.check_deadline(self.deadline())?;
                self.backend_calls.fetch_add(1, Ordering::Relaxed);
                let target = self.internal_target();
                let raw = zeta::log2(&target);
                let (_, canonical) = self.canonicalize(&raw);
                *self.log2_memo.lock().expect("memo lock") = Some(canonical.clone());
                Ok(canonical)
            }
        }
    }

    pub fn eval_index(&self, a: &Index) -> Result<BigApprox, EvalError> {
        if !a.is_admissible() {
            return Err(EvalError::NotAdmissible(a.clone()));
        }
        if let Some(v) = self.mem.lock().expect("memo lock").get(a).cloned() {
            self.cache_hits_mem.fetch_add(1, Ordering::Relaxed);
            return Ok(v);
        }
        if let Some(disk) = &self.disk {
            match disk.load(a, self.cfg.digits) {
                cache::Lookup::Hit(v) => {
                    self.cache_hits_disk.fetch_add(1, Ordering::Relaxed);
                    self.mem.lock().expect("memo lock").insert(a.clone(), v.clone());
                    return Ok(v);
                }
                cache::Lookup::Corrupt => {
                    self.cache_errors.fetch_add(1, Ordering::Relaxed);
                }
                cache::Lookup::Miss => {}
            }
        }
        let deadline = self.deadline();
        self.check_deadline(deadline)?;
        self.backend_calls.fetch_add(1, Ordering::Relaxed);
        let result = match self.cfg.backend {
            Backend::Fast => {
                let raw = self.fast_value(a, deadline)?;
                let (text, canonical) = self.canonicalize(&raw);
                self.store(a, &text, -(self.cfg.digits as i64 + 2), "fast");
                canonical
            }
            Backend::Oracle => {
                let enc = self.oracle_enclosure(a, self.cfg.oracle_cutoff)?;
                // Only enclosures already good to D digits are canonicalized
                // and cached; weak ones are returned as computed so the tail
                // bound stays visible.
                let rounded_err = &enc.err_abs + pow10(-(self.cfg.digits as i64 + 2));
                let err_exp = ceil_log10(&rounded_err);
                if err_exp <= -(self.cfg.digits as i64) {
                    let (text, canonical) = self.canonicalize_with_err(&enc, err_exp);
                    self.store(a, &text, err_exp, "oracle");
                    canonical
                } else {
                    enc
                }
            }
        };
        self.mem
            .lock()
            .expect("memo lock")
            .insert(a.clone(), result.clone());
        Ok(result)
    }

    /// Direct-summation enclosure at an explicit cutoff, bypassing caches.
    pub fn eval_oracle(&self, a: &Index, n_terms: u64) -> Result<BigApprox, EvalError> {
        if !a.is_admissible() {
            return Err(EvalError::NotAdmissible(a.clone()));
        }
        if n_terms < a.depth() as u64 {
            return Err(EvalError::CutoffBelowDepth {
                n_terms,
                depth: a.depth(),
            });
        }
        self.check_deadline(self.deadline())?;
        self.backend_calls.fetch_add(1, Ordering::Relaxed);
        self.oracle_enclosure(a, n_terms)
    }

    pub fn eval_combo(&self, c: &Combo) -> Result<BigApprox, EvalError> {
        let mut acc = BigApprox::zero();
        for (mono, coeff) in c.iter() {
            let mut term = BigApprox::exact(Rat::from_integer(BigInt::from(1)));
            for atom in mono.atoms() {
                if let Atom::T(a) = atom {
                    if !a.is_admissible() {
                        return Err(EvalError::NotAdmissible(a.clone()));
                    }
                }
                term = term.mul(&self.eval_atom(atom)?);
            }
            acc = acc.add(&term.scale(coeff));
        }
        Ok(acc)
    }

    /// Internal absolute error target: a quarter of the final rounding step,
    /// so canonical rounding at D+2 places still encloses the true value.
    fn internal_target(&self) -> Rat {
        pow10(-(self.cfg.digits as i64 + 2)) / Rat::from_integer(BigInt::from(4))
    }

    fn canonicalize(&self, v: &BigApprox) -> (String, BigApprox) {
        let places = self.cfg.digits + 2;
        let text = v.to_decimal(places);
        let parsed = parse_decimal(&text).expect("formatted decimals parse back");
        let canonical = BigApprox::new(parsed, pow10(-(places as i64)));
        (text, canonical)
    }

    fn canonicalize_with_err(&self, v: &BigApprox, err_exp: i64) -> (String, BigApprox) {
        let places = self.cfg.digits + 2;
        let text = v.to_decimal(places);
        let parsed = parse_decimal(&text).expect("formatted decimals parse back");
        (text.clone(), BigApprox::new(parsed, pow10(err_exp)))
    }

    fn store(&self, a: &Index, text: &str, err_exp: i64, backend: &str) {
        if let Some(disk) = &self.disk {
            if disk.store(a, self.cfg.digits, text, err_exp, backend).is_err() {
                self.cache_errors.fetch_add(1, Ordering::Relaxed);
            }
        }
    }

    /// Fast-backend raw value with err_abs at or below the internal target.
    fn fast_value(&self, a: &Index, deadline: Option<Instant>) -> Result<BigApprox, EvalError> {
        let target = self.internal_target();
        if a.depth() == 1 {
            // Depth-1 closed form t(s) = (1 - 2^-s) zeta(s); the word route
            // covers it too, but the closed form is cheaper and this is the
            // code path shared with Atom evaluation.
            let s = a.parts()[0];
            let z = zeta::zeta(s, &target)?;
            let factor = Rat::new(
                (BigInt::from(1) << s) - BigInt::from(1),
                BigInt::from(1) << s,
            );
            return Ok(z.scale(&factor));
        }
        if a.depth() > MAX_FAST_DEPTH {
            return Err(EvalError::DepthTooLarge {
                depth: a.depth(),
                max: MAX_FAST_DEPTH,
            });
        }
        let mut p = working_bits(self.cfg.digits, a.depth());
        for _attempt in 0..6 {
            self.check_deadline(deadline)?;
            let (mantissa, ulps) = words::t_mantissa(a, p);
            let approx = BigApprox::new(fx::to_rat(&mantissa, p), fx::ulps_to_rat(ulps, p));
            if approx.err_abs <= target {
                return Ok(approx);
            }
            p += p / 2;
        }
        Err(EvalError::PrecisionUnreachable(format!(
            "word evaluation of {a} stalled below the target"
        )))
    }

    fn oracle_enclosure(&self, a: &Index, n_terms: u64) -> Result<BigApprox, EvalError> {
        let p = working_bits(self.cfg.digits, a.depth());
        Ok(oracle::oracle_value(a, n_terms, p))
    }
}
