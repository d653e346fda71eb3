use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{GateError, GenerationConfig, TokenSource};

/// A stored completion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub model_id: String,
    pub text: String,
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub token_source: TokenSource,
    pub latency_ms: u64,
}

/// Content-addressed store: one JSON file per (model, config, prompt).
#[derive(Debug)]
pub struct ResponseCache {
    dir: PathBuf,
    write_lock: Mutex<()>,
}

/// Distinct providers never share entries, even for the same model id.
pub fn cache_key(provider_id: &str, model_id: &str, config: &GenerationConfig, prompt: &str) -> String {
    let config = serde_json::to_string(config).expect("config serializes");
    let mut hasher = Sha256::new();
    for part in [provider_id, model_id, config.as_str(), prompt] {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part.as_bytes());
    }
    hex::encode(hasher.finalize())
}

impl ResponseCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, GateError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| GateError::cache(&dir, e))?;
        Ok(Self {
            dir,
            write_lock: Mutex::new(()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// Unreadable or corrupt entries count as misses.
    pub fn get(&self, key: &str) -> Option<CacheEntry> {
        let path = self.path(key);
        let bytes = fs::read(&path).ok()?;
        match serde_json::from_slice(&bytes) {
            Ok(entry) => Some(entry),
            Err(e) => {
                log::warn!("ignoring corrupt cache entry {}: {e}", path.display());
                None
            }
        }
    }

    /// Atomic: readers see the old file or the complete new one.
    pub fn put(&self, key: &str, entry: &CacheEntry) -> Result<(), GateError> {
        let _guard = self.write_lock.lock().expect("cache lock poisoned");
        let path = self.path(key);
        let mut tmp =
            tempfile::NamedTempFile::new_in(&self.dir).map_err(|e| GateError::cache(&self.dir, e))?;
        serde_json::to_writer_pretty(&mut tmp, entry)
            .map_err(|e| GateError::cache(&path, e.into()))?;
        tmp.write_all(b"\n").map_err(|e| GateError::cache(&path, e))?;
        tmp.persist(&path).map_err(|e| GateError::cache(&path, e.error))?;
        Ok(())
    }
}
