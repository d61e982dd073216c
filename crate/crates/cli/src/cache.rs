//! Report cache: one JSON record per line, keyed by a SHA-256 of the canonical
//! diagram, the engine version, and the options that affect the result.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Bump whenever report contents change for the same input.
pub const ENGINE_VERSION: &str = concat!("kei-", env!("CARGO_PKG_VERSION"), "-r2");

pub fn cache_key(canonical_diagram: &str, options: &str) -> String {
    let mut h = Sha256::new();
    h.update(ENGINE_VERSION.as_bytes());
    h.update(b"\n");
    h.update(options.as_bytes());
    h.update(b"\n");
    h.update(canonical_diagram.as_bytes());
    hex::encode(h.finalize())
}

#[derive(Serialize, Deserialize)]
struct Record {
    key: String,
    value: serde_json::Value,
}

pub struct Cache {
    path: PathBuf,
    /// Existing file contents, kept verbatim.
    lines: Vec<String>,
    entries: HashMap<String, serde_json::Value>,
    fresh: Vec<Record>,
}

impl Cache {
    /// Unreadable or malformed lines are dropped.
    pub fn open(path: &Path) -> Cache {
        let mut lines = Vec::new();
        let mut entries = HashMap::new();
        if let Ok(text) = fs::read_to_string(path) {
            for line in text.lines() {
                if let Ok(r) = serde_json::from_str::<Record>(line) {
                    entries.insert(r.key, r.value);
                    lines.push(line.to_string());
                }
            }
        }
        Cache {
            path: path.to_path_buf(),
            lines,
            entries,
            fresh: Vec::new(),
        }
    }

    pub fn get(&self, key: &str) -> Option<&serde_json::Value> {
        self.entries.get(key)
    }

    pub fn insert(&mut self, key: String, value: serde_json::Value) {
        if self.entries.insert(key.clone(), value.clone()).is_none() {
            self.fresh.push(Record { key, value });
        }
    }

    /// Appends new records by writing a complete copy next to the cache and
    /// renaming it over the original.
    pub fn flush(&mut self) -> std::io::Result<()> {
        if self.fresh.is_empty() {
            return Ok(());
        }
        for r in self.fresh.drain(..) {
            self.lines
                .push(serde_json::to_string(&r).expect("serializable"));
        }
        let dir = match self.path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
        for line in &self.lines {
            writeln!(tmp, "{line}")?;
        }
        tmp.as_file().sync_all()?;
        tmp.persist(&self.path).map_err(|e| e.error)?;
        Ok(())
    }
}
