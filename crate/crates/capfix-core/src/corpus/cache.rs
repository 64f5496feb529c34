//! Correction cache: JSONL-backed, keyed by (backend id, model name,
//! prompt hash).
//!
//! The file is append-only and human-inspectable, which makes curating
//! fixture corrections by hand practical. Later lines override earlier ones
//! on load. A cache hit bypasses the backend entirely; writes are
//! serialized internally so parallel corpus workers can share one cache.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache line {line} is malformed: {message}")]
    MalformedLine { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheLine {
    backend_id: String,
    model_name: String,
    prompt_hash: String,
    corrected: String,
    timestamp: u64,
}

#[derive(Debug)]
struct Inner {
    entries: HashMap<(String, String, String), String>,
    appender: Option<File>,
}

/// Read-through store of corrected captions.
#[derive(Debug)]
pub struct CorrectionCache {
    inner: Mutex<Inner>,
}

impl CorrectionCache {
    /// Cache with no backing file; entries live only in memory.
    pub fn in_memory() -> Self {
        CorrectionCache {
            inner: Mutex::new(Inner {
                entries: HashMap::new(),
                appender: None,
            }),
        }
    }

    /// Open (or create) a JSONL-backed cache. Existing entries are loaded;
    /// inserts append to the file immediately, so partial progress survives
    /// aborted runs.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, CacheError> {
        let path = path.as_ref();
        let mut entries = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(path)?);
            for (lineno, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let parsed: CacheLine =
                    serde_json::from_str(&line).map_err(|err| CacheError::MalformedLine {
                        line: lineno + 1,
                        message: err.to_string(),
                    })?;
                entries.insert(
                    (parsed.backend_id, parsed.model_name, parsed.prompt_hash),
                    parsed.corrected,
                );
            }
        }
        let appender = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(CorrectionCache {
            inner: Mutex::new(Inner {
                entries,
                appender: Some(appender),
            }),
        })
    }

    pub fn get(&self, backend_id: &str, model_name: &str, prompt_hash: &str) -> Option<String> {
        let inner = self.inner.lock().expect("cache lock poisoned");
        inner
            .entries
            .get(&(
                backend_id.to_string(),
                model_name.to_string(),
                prompt_hash.to_string(),
            ))
            .cloned()
    }

    pub fn insert(
        &self,
        backend_id: &str,
        model_name: &str,
        prompt_hash: &str,
        corrected: &str,
    ) -> Result<(), CacheError> {
        let mut inner = self.inner.lock().expect("cache lock poisoned");
        if let Some(file) = inner.appender.as_mut() {
            let line = CacheLine {
                backend_id: backend_id.to_string(),
                model_name: model_name.to_string(),
                prompt_hash: prompt_hash.to_string(),
                corrected: corrected.to_string(),
                timestamp: SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
            };
            let mut encoded = serde_json::to_string(&line)
                .expect("cache line serialization cannot fail");
            encoded.push('\n');
            file.write_all(encoded.as_bytes())?;
            file.flush()?;
        }
        inner.entries.insert(
            (
                backend_id.to_string(),
                model_name.to_string(),
                prompt_hash.to_string(),
            ),
            corrected.to_string(),
        );
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("cache lock poisoned").entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
