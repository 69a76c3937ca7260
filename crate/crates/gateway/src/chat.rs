use serde::{Deserialize, Serialize};

use crate::error::{GatewayError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: String,
    pub content: String,
}

impl Message {
    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: "user".into(),
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self {
            role: "assistant".into(),
            content: content.into(),
        }
    }
}

/// An input/output demonstration sent ahead of the prompt, for base models.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FewShot {
    pub input: String,
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub endpoint: String,
    pub model_id: String,
    pub messages: Vec<Message>,
    pub temperature: f64,
    pub max_tokens: Option<u32>,
    /// Distinguishes repeated draws of the same prompt.
    pub sample_idx: u32,
}

impl ChatRequest {
    pub fn new(endpoint: impl Into<String>, model_id: impl Into<String>, prompt: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model_id: model_id.into(),
            messages: vec![Message::user(prompt)],
            temperature: 0.0,
            max_tokens: None,
            sample_idx: 0,
        }
    }

    /// Puts the demonstrations in front of the existing messages as
    /// alternating user/assistant turns.
    pub fn with_few_shot(mut self, examples: &[FewShot]) -> Self {
        let mut messages: Vec<Message> = examples
            .iter()
            .flat_map(|e| [Message::user(&e.input), Message::assistant(&e.output)])
            .collect();
        messages.append(&mut self.messages);
        self.messages = messages;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.messages.is_empty() {
            return Err(GatewayError::InvalidRequest("messages must not be empty".into()));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(GatewayError::InvalidRequest(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub text: String,
    pub finish_reason: Option<String>,
    #[serde(default)]
    pub usage: Usage,
    pub latency_ms: u64,
}

impl ChatResponse {
    pub fn text(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            finish_reason: Some("stop".into()),
            usage: Usage::default(),
            latency_ms: 0,
        }
    }
}

/// Anything that can answer a chat request.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse>;
}
