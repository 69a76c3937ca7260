//! Prompt templates, an OpenAI-compatible chat client, and a
//! content-addressed response cache for offline replay.

pub mod cache;
pub mod chat;
pub mod client;
pub mod error;
pub mod http;
pub mod ops;
pub mod ratelimit;
pub mod scripted;
pub mod template;

pub use cache::{cache_key, Cache};
pub use chat::{ChatBackend, ChatRequest, ChatResponse, FewShot, Message};
pub use client::{Gateway, Mode};
pub use error::{GatewayError, Result};
pub use template::{render_prompt, TemplateId};
