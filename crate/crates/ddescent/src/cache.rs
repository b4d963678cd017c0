//! Keyed on-disk cache of distribution tables. Files are canonical JSON
//! named by a stable hash of `(n, spec)` and carry a checksum of the
//! payload; anything that fails verification is treated as a miss, never
//! returned.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::dist::DistributionTable;
use crate::error::{Error, Result};
use crate::jsonio::{canonical_json, table_from_value, table_value};
use crate::perm::DescentSpec;

/// Environment variable consulted when no cache directory flag is given.
pub const CACHE_DIR_ENV: &str = "DDESCENT_CACHE_DIR";

#[derive(Debug)]
pub enum CacheLookup {
    Hit(DistributionTable),
    Miss,
    /// Present but unusable (corrupt, checksum mismatch, wrong key);
    /// callers should warn and recompute.
    Rejected(String),
}

#[derive(Debug, Clone)]
pub struct TableCache {
    dir: PathBuf,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

impl TableCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(TableCache { dir })
    }

    /// Resolves the cache from an explicit flag or [`CACHE_DIR_ENV`];
    /// `None` when neither is configured.
    pub fn from_flag_or_env(flag: Option<PathBuf>) -> Result<Option<Self>> {
        match flag.or_else(|| std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from)) {
            Some(dir) => Ok(Some(TableCache::new(dir)?)),
            None => Ok(None),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn key_string(n: u32, spec: &DescentSpec) -> String {
        format!("n={n};spec={}", spec.label())
    }

    pub fn file_path(&self, n: u32, spec: &DescentSpec) -> PathBuf {
        let digest = sha256_hex(Self::key_string(n, spec).as_bytes());
        self.dir.join(format!("{digest}.json"))
    }

    /// Persists the table atomically (write temp, then rename).
    pub fn store(&self, table: &DistributionTable) -> Result<PathBuf> {
        let key = Self::key_string(table.n(), table.spec());
        let payload = table_value(table);
        let checksum = sha256_hex(canonical_json(&payload).as_bytes());
        let document = json!({
            "key": key,
            "payload": payload,
            "sha256": checksum,
        });
        let path = self.file_path(table.n(), table.spec());
        let nanos = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.subsec_nanos())
            .unwrap_or(0);
        let temp = self
            .dir
            .join(format!(".tmp-{}-{nanos}", std::process::id()));
        std::fs::write(&temp, canonical_json(&document))?;
        std::fs::rename(&temp, &path)?;
        Ok(path)
    }

    pub fn lookup(&self, n: u32, spec: &DescentSpec) -> CacheLookup {
        let path = self.file_path(n, spec);
        let text = match std::fs::read_to_string(&path) {
            Ok(text) => text,
            Err(err) if err.kind() == std::io::ErrorKind::NotFound => return CacheLookup::Miss,
            Err(err) => return CacheLookup::Rejected(format!("unreadable cache file: {err}")),
        };
        let document: Value = match serde_json::from_str(&text) {
            Ok(value) => value,
            Err(err) => return CacheLookup::Rejected(format!("invalid cache json: {err}")),
        };
        let stored_key = document.get("key").and_then(Value::as_str).unwrap_or("");
        if stored_key != Self::key_string(n, spec) {
            return CacheLookup::Rejected(format!("cache key mismatch: {stored_key:?}"));
        }
        let payload = match document.get("payload") {
            Some(payload) => payload,
            None => return CacheLookup::Rejected("cache file has no payload".into()),
        };
        let recorded = document.get("sha256").and_then(Value::as_str).unwrap_or("");
        let recomputed = sha256_hex(canonical_json(payload).as_bytes());
        if recorded != recomputed {
            return CacheLookup::Rejected("cache checksum mismatch".into());
        }
        match table_from_value(payload) {
            Ok(table) if table.n() == n && table.spec() == spec => CacheLookup::Hit(table),
            Ok(_) => CacheLookup::Rejected("cache payload is for a different key".into()),
            Err(err) => CacheLookup::Rejected(format!("cache payload invalid: {err}")),
        }
    }
}

impl From<&Error> for CacheLookup {
    fn from(err: &Error) -> Self {
        CacheLookup::Rejected(err.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::exact_distribution;

    fn sample_table() -> DistributionTable {
        exact_distribution(8, &DescentSpec::uniform(2).unwrap(), 12).unwrap()
    }

    #[test]
    fn store_then_lookup_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let cache = TableCache::new(dir.path()).unwrap();
        let table = sample_table();
        cache.store(&table).unwrap();
        match cache.lookup(8, table.spec()) {
            CacheLookup::Hit(found) => assert_eq!(found, table),
            other => panic!("expected hit, got {other:?}"),
        }
    }

    #[test]
    fn absent_key_is_a_miss() {
        let dir = tempfile::tempdir().unwrap();
        let cache = TableCache::new(dir.path()).unwrap();
        assert!(matches!(
            cache.lookup(5, &DescentSpec::uniform(1).unwrap()),
            CacheLookup::Miss
        ));
    }

    #[test]
    fn tampered_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cache = TableCache::new(dir.path()).unwrap();
        let table = sample_table();
        let path = cache.store(&table).unwrap();

        // flip one byte inside a stored count
        let mut bytes = std::fs::read(&path).unwrap();
        let pos = bytes.windows(8).position(|w| w == b"\"counts\"").unwrap() + 12;
        bytes[pos] = if bytes[pos] == b'1' { b'2' } else { b'1' };
        std::fs::write(&path, &bytes).unwrap();

        assert!(matches!(
            cache.lookup(8, table.spec()),
            CacheLookup::Rejected(_)
        ));

        // garbage is rejected too, not trusted
        std::fs::write(&path, b"not json at all").unwrap();
        assert!(matches!(
            cache.lookup(8, table.spec()),
            CacheLookup::Rejected(_)
        ));
    }

    #[test]
    fn different_specs_get_different_files() {
        let dir = tempfile::tempdir().unwrap();
        let cache = TableCache::new(dir.path()).unwrap();
        let a = cache.file_path(8, &DescentSpec::uniform(2).unwrap());
        let b = cache.file_path(8, &DescentSpec::uniform(3).unwrap());
        let c = cache.file_path(9, &DescentSpec::uniform(2).unwrap());
        assert_ne!(a, b);
        assert_ne!(a, c);
    }
}
