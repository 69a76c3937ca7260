use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;
use crate::io::{content_hash, to_canonical_json};

/// Configuration and provenance of one pipeline run.
///
/// `run_id` is a content hash of every field except `created_at`, so two
/// runs with identical inputs and settings share an id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub command: String,
    pub model_id: Option<String>,
    pub mode: Option<String>,
    pub k: Option<u32>,
    pub temperature: Option<f64>,
    pub n_samples: Option<u32>,
    /// Template id to content hash of the exact template body used.
    pub prompt_template_hashes: BTreeMap<String, String>,
    /// Hash over all input hashes, in input-name order.
    pub dataset_hash: String,
    /// Input name to content hash of its bytes.
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub settings: BTreeMap<String, Value>,
    pub created_at: String,
}

impl RunManifest {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            run_id: String::new(),
            command: command.into(),
            model_id: None,
            mode: None,
            k: None,
            temperature: None,
            n_samples: None,
            prompt_template_hashes: BTreeMap::new(),
            dataset_hash: String::new(),
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
            settings: BTreeMap::new(),
            created_at: String::new(),
        }
    }

    pub fn input(&mut self, name: impl Into<String>, bytes: &[u8]) -> &mut Self {
        self.inputs.insert(name.into(), content_hash(bytes));
        self
    }

    pub fn template(&mut self, id: impl Into<String>, body: &str) -> &mut Self {
        self.prompt_template_hashes.insert(id.into(), content_hash(body.as_bytes()));
        self
    }

    pub fn setting(&mut self, key: impl Into<String>, value: impl Serialize) -> &mut Self {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.settings.insert(key.into(), v);
        self
    }

    pub fn output(&mut self, name: impl Into<String>) -> &mut Self {
        self.outputs.push(name.into());
        self
    }

    /// Fills in `dataset_hash`, `run_id` and `created_at`.
    pub fn finish(mut self, created_at: impl Into<String>) -> Result<Self> {
        let joined: String = self.inputs.values().map(String::as_str).collect::<Vec<_>>().join("\n");
        self.dataset_hash = content_hash(joined.as_bytes());
        self.run_id = String::new();
        self.created_at = String::new();
        let id = content_hash(to_canonical_json(&self)?.as_bytes());
        self.run_id = id[..16].to_string();
        self.created_at = created_at.into();
        Ok(self)
    }
}
