use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{LogprobBackend, RawLogprobs};
use crate::error::Result;

/// On-disk form of one cached response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub model_id: String,
    pub prompt_sha256: String,
    pub tokens: Vec<String>,
    pub token_logprobs: Vec<Option<f64>>,
    pub text_offset: Vec<usize>,
    pub created_at: String,
    /// SHA-256 over the fields above except `created_at`.
    pub checksum: String,
}

impl CacheEntry {
    fn new(key: &str, model_id: &str, prompt: &str, raw: &RawLogprobs) -> Self {
        let mut e = CacheEntry {
            key: key.to_string(),
            model_id: model_id.to_string(),
            prompt_sha256: sha256_hex(prompt.as_bytes()),
            tokens: raw.tokens.clone(),
            token_logprobs: raw.token_logprobs.clone(),
            text_offset: raw.text_offset.clone(),
            created_at: chrono::Utc::now().to_rfc3339(),
            checksum: String::new(),
        };
        e.checksum = e.compute_checksum();
        e
    }

    fn compute_checksum(&self) -> String {
        let payload = serde_json::to_vec(&(
            &self.key,
            &self.model_id,
            &self.prompt_sha256,
            &self.tokens,
            &self.token_logprobs,
            &self.text_offset,
        ))
        .expect("entry serializes");
        sha256_hex(&payload)
    }

    pub fn is_intact(&self, key: &str) -> bool {
        self.key == key && self.checksum == self.compute_checksum() && self.raw().validate().is_ok()
    }

    pub fn raw(&self) -> RawLogprobs {
        RawLogprobs {
            tokens: self.tokens.clone(),
            token_logprobs: self.token_logprobs.clone(),
            text_offset: self.text_offset.clone(),
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of everything that determines a response.
pub fn cache_key(model_id: &str, prompt: &str, params: &serde_json::Value) -> String {
    let mut h = Sha256::new();
    for part in [
        model_id.as_bytes(),
        prompt.as_bytes(),
        params.to_string().as_bytes(),
    ] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part);
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheStats {
    pub hits: usize,
    pub misses: usize,
}

impl CacheStats {
    pub fn hit_rate(&self) -> f64 {
        let total = self.hits + self.misses;
        if total == 0 {
            0.0
        } else {
            self.hits as f64 / total as f64
        }
    }
}

/// Summary of a cache directory.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DirStats {
    pub entries: usize,
    pub bytes: u64,
}

/// Disk cache in front of another backend. One JSON file per key; files are
/// created atomically and never rewritten unless found corrupt.
pub struct CachedBackend<B> {
    inner: B,
    dir: PathBuf,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl<B: LogprobBackend> CachedBackend<B> {
    pub fn new(inner: B, dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(CachedBackend {
            inner,
            dir,
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn entry_path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    fn read(&self, key: &str) -> Option<RawLogprobs> {
        let path = self.entry_path(key);
        let text = std::fs::read_to_string(&path).ok()?;
        match serde_json::from_str::<CacheEntry>(&text) {
            Ok(e) if e.is_intact(key) => Some(e.raw()),
            _ => {
                log::warn!("ignoring corrupt cache entry {}", path.display());
                let _ = std::fs::remove_file(&path);
                None
            }
        }
    }

    fn write(&self, key: &str, prompt: &str, raw: &RawLogprobs) -> Result<Option<RawLogprobs>> {
        let entry = CacheEntry::new(key, self.inner.model_id(), prompt, raw);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        serde_json::to_writer(&mut tmp, &entry)?;
        tmp.write_all(b"\n")?;
        tmp.as_file().sync_all()?;
        match tmp.persist_noclobber(self.entry_path(key)) {
            Ok(_) => Ok(None),
            // Another writer won; its entry is authoritative.
            Err(e) if e.error.kind() == std::io::ErrorKind::AlreadyExists => Ok(self.read(key)),
            Err(e) => Err(e.error.into()),
        }
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
        }
    }
}

impl<B: LogprobBackend> LogprobBackend for CachedBackend<B> {
    fn model_id(&self) -> &str {
        self.inner.model_id()
    }

    fn echo(&self, prompt: &str) -> Result<RawLogprobs> {
        let key = cache_key(self.inner.model_id(), prompt, &self.inner.request_params());
        if let Some(raw) = self.read(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(raw);
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let raw = self.inner.echo(prompt)?;
        Ok(self.write(&key, prompt, &raw)?.unwrap_or(raw))
    }

    fn request_params(&self) -> serde_json::Value {
        self.inner.request_params()
    }

    fn cache_stats(&self) -> Option<CacheStats> {
        Some(self.stats())
    }
}

fn entry_files(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.exists() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir)? {
        let p = e?.path();
        if p.extension().is_some_and(|x| x == "json") {
            out.push(p);
        }
    }
    Ok(out)
}

impl DirStats {
    pub fn scan(dir: impl AsRef<Path>) -> Result<Self> {
        let mut s = DirStats::default();
        for p in entry_files(dir.as_ref())? {
            s.entries += 1;
            s.bytes += std::fs::metadata(&p)?.len();
        }
        Ok(s)
    }

    /// Removes every entry file; returns how many were removed.
    pub fn clear(dir: impl AsRef<Path>) -> Result<usize> {
        let files = entry_files(dir.as_ref())?;
        for p in &files {
            std::fs::remove_file(p)?;
        }
        Ok(files.len())
    }
}
