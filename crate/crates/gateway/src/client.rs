use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::cache::{cache_key, Cache};
use crate::chat::{ChatBackend, ChatRequest, ChatResponse};
use crate::error::{GatewayError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Network only; nothing is stored.
    Live,
    /// Cache first, network on a miss, and the answer is stored.
    Record,
    /// Cache only; a miss is an error.
    Replay,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Live => "live",
            Mode::Record => "record",
            Mode::Replay => "replay",
        })
    }
}

impl FromStr for Mode {
    type Err = GatewayError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "live" => Ok(Mode::Live),
            "record" => Ok(Mode::Record),
            "replay" => Ok(Mode::Replay),
            other => Err(GatewayError::InvalidRequest(format!("unknown mode `{other}`"))),
        }
    }
}

/// Routes chat requests through the cache and, when allowed, a backend.
pub struct Gateway {
    mode: Mode,
    cache: Option<Cache>,
    backend: Option<Box<dyn ChatBackend>>,
    created_at: String,
    network_calls: AtomicUsize,
}

impl Gateway {
    pub fn new(mode: Mode, cache: Option<Cache>, backend: Option<Box<dyn ChatBackend>>) -> Result<Self> {
        if mode != Mode::Live && cache.is_none() {
            return Err(GatewayError::InvalidRequest(format!("{mode} mode needs a cache directory")));
        }
        if mode != Mode::Replay && backend.is_none() {
            return Err(GatewayError::NoBackend);
        }
        Ok(Self {
            mode,
            cache,
            backend,
            created_at: String::new(),
            network_calls: AtomicUsize::new(0),
        })
    }

    /// Timestamp stamped on newly recorded cache entries.
    pub fn with_created_at(mut self, created_at: impl Into<String>) -> Self {
        self.created_at = created_at.into();
        self
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn network_calls(&self) -> usize {
        self.network_calls.load(Ordering::Relaxed)
    }

    fn call_backend(&self, request: &ChatRequest) -> Result<ChatResponse> {
        let backend = self.backend.as_ref().ok_or(GatewayError::NoBackend)?;
        self.network_calls.fetch_add(1, Ordering::Relaxed);
        backend.complete(request)
    }

    pub fn chat(&self, request: &ChatRequest) -> Result<ChatResponse> {
        request.validate()?;
        match self.mode {
            Mode::Live => self.call_backend(request),
            Mode::Record => {
                let cache = self.cache.as_ref().expect("checked in new");
                if let Some(hit) = cache.get(&cache_key(request)) {
                    return Ok(hit);
                }
                let resp = self.call_backend(request)?;
                cache.put(request, &resp, &self.created_at)?;
                Ok(resp)
            }
            Mode::Replay => {
                let key = cache_key(request);
                self.cache
                    .as_ref()
                    .expect("checked in new")
                    .get(&key)
                    .ok_or(GatewayError::CacheMiss { key })
            }
        }
    }
}
