//! Persistent per-value cache.
//!
//! One JSON document per (index, digits) pair, stored under
//! `<root>/<weight>/<parts>@<digits>.json` with decimal strings only.
//! Readers treat anything malformed or mismatched as a miss; writers go
//! through a temporary file and an atomic rename so concurrent evaluators
//! never observe torn entries.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::approx::{parse_decimal, pow10, BigApprox};
use crate::index::Index;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CacheEntry {
    pub index: String,
    pub digits: u32,
    pub value: String,
    pub err_exp: i64,
    pub backend: String,
}

/// Result of a cache probe; corrupt entries are reported so callers can
/// count them, but they never fail an evaluation.
pub enum Lookup {
    Hit(BigApprox),
    Miss,
    Corrupt,
}

pub struct Cache {
    root: PathBuf,
}

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

fn index_text(a: &Index) -> String {
    let parts: Vec<String> = a.parts().iter().map(|p| p.to_string()).collect();
    parts.join(",")
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Cache { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn entry_path(&self, a: &Index, digits: u32) -> PathBuf {
        self.root
            .join(a.weight().to_string())
            .join(format!("{}@{}.json", index_text(a), digits))
    }

    /// Probe for (a, digits). A hit must match the requested key exactly and
    /// promise at least `digits` correct digits.
    pub fn load(&self, a: &Index, digits: u32) -> Lookup {
        let path = self.entry_path(a, digits);
        let raw = match fs::read_to_string(&path) {
            Ok(s) => s,
            Err(_) => return Lookup::Miss,
        };
        let entry: CacheEntry = match serde_json::from_str(&raw) {
            Ok(e) => e,
            Err(_) => return Lookup::Corrupt,
        };
        if entry.index != index_text(a) || entry.digits != digits {
            return Lookup::Corrupt;
        }
        if entry.err_exp > -(digits as i64) {
            return Lookup::Corrupt;
        }
        match parse_decimal(&entry.value) {
            Ok(v) => Lookup::Hit(BigApprox::new(v, pow10(entry.err_exp))),
            Err(_) => Lookup::Corrupt,
        }
    }

    /// Write an entry via a unique temporary file and rename over the final
    /// path. Failures are reported, not fatal; the cache is best effort.
    pub fn store(
        &self,
        a: &Index,
        digits: u32,
        value: &str,
        err_exp: i64,
        backend: &str,
    ) -> std::io::Result<()> {
        let path = self.entry_path(a, digits);
        let dir = path.parent().expect("entry path always has a parent");
        fs::create_dir_all(dir)?;
        let entry = CacheEntry {
            index: index_text(a),
            digits,
            value: value.to_string(),
            err_exp,
            backend: backend.to_string(),
        };
        let body = serde_json::to_string_pretty(&entry).expect("entry serializes");
        let tmp = dir.join(format!(
            ".tmp-{}-{}",
            std::process::id(),
            TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        fs::write(&tmp, body)?;
        match fs::rename(&tmp, &path) {
            Ok(()) => Ok(()),
            Err(e) => {
                let _ = fs::remove_file(&tmp);
                Err(e)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let a = Index::new(vec![2, 1, 2]).unwrap();

        assert!(matches!(cache.load(&a, 50), Lookup::Miss));
        cache.store(&a, 50, "0.0123", -52, "fast").unwrap();
        let expected = dir.path().join("5").join("2,1,2@50.json");
        assert!(expected.is_file());
        match cache.load(&a, 50) {
            Lookup::Hit(v) => {
                assert_eq!(v.value, parse_decimal("0.0123").unwrap());
                assert_eq!(v.err_abs, pow10(-52));
            }
            _ => panic!("expected a hit"),
        }
        // Same index at other digit counts is a distinct key.
        assert!(matches!(cache.load(&a, 40), Lookup::Miss));
    }

    #[test]
    fn rejects_weak_or_garbled_entries() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let a = Index::new(vec![3]).unwrap();

        // Claimed error too large for the requested digit count.
        cache.store(&a, 50, "1.05", -40, "oracle").unwrap();
        assert!(matches!(cache.load(&a, 50), Lookup::Corrupt));

        // Bytes that are not a cache entry at all.
        let path = dir.path().join("3").join("3@50.json");
        fs::write(&path, b"{]").unwrap();
        assert!(matches!(cache.load(&a, 50), Lookup::Corrupt));

        // A well-formed entry sitting under the wrong filename key.
        let b = Index::new(vec![2, 1]).unwrap();
        cache.store(&b, 50, "0.5", -52, "fast").unwrap();
        fs::copy(dir.path().join("3").join("2,1@50.json"), &path).unwrap();
        assert!(matches!(cache.load(&a, 50), Lookup::Corrupt));
    }
}
