//! Append-only, content-addressed JSONL store of chat responses.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use valuescope_core::io::to_canonical_json;

use crate::chat::{ChatRequest, ChatResponse, Message};
use crate::error::{GatewayError, Result};

pub const CACHE_FILE: &str = "cache.jsonl";

/// The fields a cache key depends on, and nothing else.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyFields {
    pub endpoint: String,
    pub model_id: String,
    pub messages: Vec<Message>,
    pub temperature: f64,
    pub sample_idx: u32,
}

impl From<&ChatRequest> for KeyFields {
    fn from(r: &ChatRequest) -> Self {
        Self {
            endpoint: r.endpoint.clone(),
            model_id: r.model_id.clone(),
            messages: r.messages.clone(),
            temperature: r.temperature,
            sample_idx: r.sample_idx,
        }
    }
}

/// SHA-256 hex of the canonical JSON of the key fields.
pub fn cache_key(request: &ChatRequest) -> String {
    let canonical = to_canonical_json(&KeyFields::from(request)).expect("key fields always serialize");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub request: KeyFields,
    pub response: ChatResponse,
    pub created_at: String,
}

pub struct Cache {
    path: PathBuf,
    entries: RwLock<HashMap<String, ChatResponse>>,
    writer: Mutex<()>,
}

impl Cache {
    /// Opens (or starts) the store in `dir`. Later duplicates of a key are
    /// ignored so the first recorded answer wins.
    pub fn open(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| GatewayError::io(dir, e))?;
        let path = dir.join(CACHE_FILE);
        let mut entries = HashMap::new();
        if path.exists() {
            let text = std::fs::read_to_string(&path).map_err(|e| GatewayError::io(&path, e))?;
            for (i, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let entry: CacheEntry = serde_json::from_str(line).map_err(|e| {
                    GatewayError::Core(valuescope_core::Error::Parse {
                        path: path.clone(),
                        line: i + 1,
                        message: e.to_string(),
                    })
                })?;
                entries.entry(entry.key).or_insert(entry.response);
            }
        }
        Ok(Self {
            path,
            entries: RwLock::new(entries),
            writer: Mutex::new(()),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.entries.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &str) -> Option<ChatResponse> {
        self.entries.read().get(key).cloned()
    }

    /// Appends one entry unless the key is already stored.
    pub fn put(&self, request: &ChatRequest, response: &ChatResponse, created_at: &str) -> Result<String> {
        let key = cache_key(request);
        let _guard = self.writer.lock();
        if self.entries.read().contains_key(&key) {
            return Ok(key);
        }
        let entry = CacheEntry {
            key: key.clone(),
            request: request.into(),
            response: response.clone(),
            created_at: created_at.to_string(),
        };
        let mut line = to_canonical_json(&entry)?;
        line.push('\n');
        let mut f: File = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|e| GatewayError::io(&self.path, e))?;
        f.write_all(line.as_bytes()).map_err(|e| GatewayError::io(&self.path, e))?;
        self.entries.write().insert(key.clone(), response.clone());
        Ok(key)
    }
}
