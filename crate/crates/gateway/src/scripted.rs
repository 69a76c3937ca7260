//! A deterministic backend that answers from a fixed script, for building
//! cache fixtures and for tests.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::chat::{ChatBackend, ChatRequest, ChatResponse};
use crate::error::{GatewayError, Result};

struct Rule {
    needle: String,
    suffix: bool,
    retry: bool,
    reply: String,
}

impl Rule {
    fn matches(&self, prompt: &str, retry: bool) -> bool {
        self.retry == retry
            && if self.suffix {
                prompt.ends_with(&self.needle)
            } else {
                prompt.contains(&self.needle)
            }
    }
}

#[derive(Default)]
pub struct ScriptedBackend {
    rules: Vec<Rule>,
    calls: AtomicUsize,
}

impl ScriptedBackend {
    pub fn new() -> Self {
        Self::default()
    }

    /// Answer first-turn requests whose prompt contains `needle`.
    pub fn reply(mut self, needle: impl Into<String>, reply: impl Into<String>) -> Self {
        self.rules.push(Rule {
            needle: needle.into(),
            suffix: false,
            retry: false,
            reply: reply.into(),
        });
        self
    }

    /// Answer first-turn requests whose prompt ends with `needle`.
    pub fn reply_to_ending(mut self, needle: impl Into<String>, reply: impl Into<String>) -> Self {
        self.rules.push(Rule {
            needle: needle.into(),
            suffix: true,
            retry: false,
            reply: reply.into(),
        });
        self
    }

    /// Answer the re-ask turn of a conversation whose prompt contains `needle`.
    pub fn reply_on_retry(mut self, needle: impl Into<String>, reply: impl Into<String>) -> Self {
        self.rules.push(Rule {
            needle: needle.into(),
            suffix: false,
            retry: true,
            reply: reply.into(),
        });
        self
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }
}

impl ChatBackend for ScriptedBackend {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let users: Vec<&str> = request
            .messages
            .iter()
            .filter(|m| m.role == "user")
            .map(|m| m.content.as_str())
            .collect();
        let retry = users.len() > 1;
        let prompt = if retry { users[users.len() - 2] } else { users.last().copied().unwrap_or("") };
        self.rules
            .iter()
            .find(|r| r.matches(prompt, retry))
            .map(|r| ChatResponse::text(&r.reply))
            .ok_or_else(|| GatewayError::Transport(format!("no scripted reply for prompt: {:.80}", prompt)))
    }
}
