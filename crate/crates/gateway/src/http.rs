//! OpenAI-compatible chat-completions over HTTPS.

use std::time::{Duration, Instant};

use serde::Deserialize;
use serde_json::json;

use crate::chat::{ChatBackend, ChatRequest, ChatResponse, Usage};
use crate::error::{GatewayError, Result};
use crate::ratelimit::TokenBucket;

pub const ENDPOINT_ENV: &str = "VALUESCOPE_ENDPOINT";
pub const API_KEY_ENV: &str = "VALUESCOPE_API_KEY";
pub const DEFAULT_ENDPOINT: &str = "https://api.openai.com/v1";

#[derive(Debug, Clone)]
pub struct HttpConfig {
    pub api_key: Option<String>,
    pub requests_per_sec: f64,
    pub max_attempts: u32,
    pub initial_backoff: Duration,
    pub timeout: Duration,
}

impl Default for HttpConfig {
    fn default() -> Self {
        Self {
            api_key: None,
            requests_per_sec: 2.0,
            max_attempts: 3,
            initial_backoff: Duration::from_millis(500),
            timeout: Duration::from_secs(120),
        }
    }
}

pub struct HttpBackend {
    client: reqwest::blocking::Client,
    config: HttpConfig,
    bucket: TokenBucket,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Option<Usage>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
    #[serde(default)]
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct WireMessage {
    #[serde(default)]
    content: Option<String>,
}

enum Attempt {
    Done(ChatResponse),
    Retry(GatewayError),
    Fail(GatewayError),
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| GatewayError::Transport(e.to_string()))?;
        let bucket = TokenBucket::new(config.requests_per_sec, config.requests_per_sec.ceil());
        Ok(Self { client, config, bucket })
    }

    fn url(endpoint: &str) -> String {
        format!("{}/chat/completions", endpoint.trim_end_matches('/'))
    }

    fn attempt(&self, request: &ChatRequest) -> Attempt {
        let url = Self::url(&request.endpoint);
        let mut body = json!({
            "model": request.model_id,
            "messages": request.messages,
            "temperature": request.temperature,
        });
        if let Some(m) = request.max_tokens {
            body["max_tokens"] = json!(m);
        }
        let mut req = self.client.post(&url).json(&body);
        if let Some(key) = &self.config.api_key {
            req = req.bearer_auth(key);
        }
        self.bucket.acquire();
        let start = Instant::now();
        let resp = match req.send() {
            Ok(r) => r,
            Err(e) => return Attempt::Retry(GatewayError::Transport(e.to_string())),
        };
        let status = resp.status();
        let text = match resp.text() {
            Ok(t) => t,
            Err(e) => return Attempt::Retry(GatewayError::Transport(e.to_string())),
        };
        let latency_ms = start.elapsed().as_millis() as u64;
        if !status.is_success() {
            let err = GatewayError::Http {
                status: status.as_u16(),
                url,
                body: text.chars().take(500).collect(),
            };
            return if status.as_u16() == 429 || status.is_server_error() {
                Attempt::Retry(err)
            } else {
                Attempt::Fail(err)
            };
        }
        let wire: WireResponse = match serde_json::from_str(&text) {
            Ok(w) => w,
            Err(e) => return Attempt::Fail(e.into()),
        };
        let Some(choice) = wire.choices.into_iter().next() else {
            return Attempt::Fail(GatewayError::Transport("response has no choices".into()));
        };
        Attempt::Done(ChatResponse {
            text: choice.message.content.unwrap_or_default(),
            finish_reason: choice.finish_reason,
            usage: wire.usage.unwrap_or_default(),
            latency_ms,
        })
    }
}

impl ChatBackend for HttpBackend {
    /// Up to `max_attempts` tries; 429, 5xx and transport failures back off
    /// exponentially, other errors return at once.
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse> {
        request.validate()?;
        let mut backoff = self.config.initial_backoff;
        let mut last = None;
        for attempt in 1..=self.config.max_attempts.max(1) {
            match self.attempt(request) {
                Attempt::Done(r) => return Ok(r),
                Attempt::Fail(e) => return Err(e),
                Attempt::Retry(e) => {
                    log::warn!("attempt {attempt} failed: {e}");
                    last = Some(e);
                    if attempt < self.config.max_attempts {
                        std::thread::sleep(backoff);
                        backoff *= 2;
                    }
                }
            }
        }
        Err(last.unwrap_or_else(|| GatewayError::Transport("no attempt made".into())))
    }
}
