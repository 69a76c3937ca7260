//! Shared domain records.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::values::ValueSystem;

/// One side of a dilemma.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub text: String,
    pub values: Vec<String>,
}

/// A binary ethical dilemma whose actions each carry a value set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilemmaRecord {
    pub id: String,
    pub scenario: String,
    pub action1: Action,
    pub action2: Action,
}

impl DilemmaRecord {
    pub fn action(&self, choice: Choice) -> &Action {
        match choice {
            Choice::Action1 => &self.action1,
            Choice::Action2 => &self.action2,
        }
    }

    /// Values of both actions, deduplicated, in first-seen order.
    pub fn all_values(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for v in self.action1.values.iter().chain(&self.action2.values) {
            if !out.contains(&v.as_str()) {
                out.push(v);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenQuestionRecord {
    pub id: String,
    pub topic: String,
    pub question: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Choice {
    Action1,
    Action2,
}

impl Choice {
    pub fn other(self) -> Self {
        match self {
            Choice::Action1 => Choice::Action2,
            Choice::Action2 => Choice::Action1,
        }
    }

    /// Parses a short-form answer. Accepts `Action 1` / `Action 2` (any case,
    /// optional space, optional surrounding quotes or punctuation) and nothing else.
    pub fn parse_answer(raw: &str) -> Option<Self> {
        let core = raw
            .trim()
            .trim_matches(|c: char| !c.is_alphanumeric())
            .to_ascii_lowercase();
        let rest = core.strip_prefix("action")?.trim_start();
        match rest {
            "1" => Some(Choice::Action1),
            "2" => Some(Choice::Action2),
            _ => None,
        }
    }
}

/// Whether the prompt revealed the value sets behind each action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    #[default]
    Implicit,
    Explicit,
}

/// A model's short-form decision on one dilemma. `choice` is `None` when the
/// raw answer did not match the expected grammar.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub dilemma_id: String,
    pub choice: Option<Choice>,
    #[serde(default)]
    pub condition: Condition,
    #[serde(default)]
    pub raw_text: String,
}

impl Decision {
    pub fn from_raw(dilemma_id: impl Into<String>, condition: Condition, raw_text: impl Into<String>) -> Self {
        let raw_text = raw_text.into();
        Self {
            dilemma_id: dilemma_id.into(),
            choice: Choice::parse_answer(&raw_text),
            condition,
            raw_text,
        }
    }
}

/// A raw model response, one line of a responses stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub response_id: String,
    pub source_record_id: String,
    pub model_id: String,
    pub mode: String,
    pub k: u32,
    pub temperature: f64,
    pub sample_idx: u32,
    pub text: String,
}

/// One extracted argument, one line of an arguments stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgumentRecord {
    pub response_id: String,
    pub index: u32,
    pub text: String,
    pub values: Vec<String>,
    pub spec_path: Option<u8>,
    pub spec_attr: Option<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Argument {
    /// 1-based position in the response.
    pub index: u32,
    pub text: String,
    pub values: Vec<String>,
    pub specificity_path: Option<u8>,
    pub specificity_attr: Option<u8>,
}

/// A long-form response decomposed into its ordered arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedResponse {
    pub response_id: String,
    pub source_record_id: String,
    pub model_id: String,
    pub k_requested: u32,
    pub temperature: f64,
    pub sample_idx: u32,
    pub full_text: String,
    pub arguments: Vec<Argument>,
}

impl AnnotatedResponse {
    /// Realized number of arguments; may differ from `k_requested`.
    pub fn m(&self) -> usize {
        self.arguments.len()
    }

    /// Checks that argument indices run 1..=m in order and that specificity
    /// scores, when present, lie in 1..=5.
    pub fn check(&self) -> Result<()> {
        for (pos, arg) in self.arguments.iter().enumerate() {
            if arg.index as usize != pos + 1 {
                return Err(Error::Domain(format!(
                    "response `{}`: argument at position {} has index {}",
                    self.response_id,
                    pos + 1,
                    arg.index
                )));
            }
            for s in [arg.specificity_path, arg.specificity_attr].into_iter().flatten() {
                if !(1..=5).contains(&s) {
                    return Err(Error::Domain(format!(
                        "response `{}`: specificity {s} outside 1..=5",
                        self.response_id
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn from_records(response: &ResponseRecord, mut args: Vec<ArgumentRecord>) -> Result<Self> {
        args.sort_by_key(|a| a.index);
        let out = Self {
            response_id: response.response_id.clone(),
            source_record_id: response.source_record_id.clone(),
            model_id: response.model_id.clone(),
            k_requested: response.k,
            temperature: response.temperature,
            sample_idx: response.sample_idx,
            full_text: response.text.clone(),
            arguments: args
                .into_iter()
                .map(|a| Argument {
                    index: a.index,
                    text: a.text,
                    values: a.values,
                    specificity_path: a.spec_path,
                    specificity_attr: a.spec_attr,
                })
                .collect(),
        };
        out.check()?;
        Ok(out)
    }

    pub fn to_argument_records(&self) -> Vec<ArgumentRecord> {
        self.arguments
            .iter()
            .map(|a| ArgumentRecord {
                response_id: self.response_id.clone(),
                index: a.index,
                text: a.text.clone(),
                values: a.values.clone(),
                spec_path: a.specificity_path,
                spec_attr: a.specificity_attr,
            })
            .collect()
    }
}

/// Which generation mode a preference vector was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModeTag {
    ShortForm,
    LongForm { k: u32 },
    External,
}

impl std::fmt::Display for ModeTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModeTag::ShortForm => f.write_str("short_form"),
            ModeTag::LongForm { k } => write!(f, "long_form(k={k})"),
            ModeTag::External => f.write_str("external"),
        }
    }
}

/// Value name to preference score. Higher means more preferred.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceVector {
    pub mode: ModeTag,
    pub scores: BTreeMap<String, f64>,
}

impl PreferenceVector {
    pub fn new(mode: ModeTag, scores: BTreeMap<String, f64>) -> Result<Self> {
        if let Some((k, v)) = scores.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Domain(format!("score for `{k}` is not finite ({v})")));
        }
        Ok(Self { mode, scores })
    }

    pub fn get(&self, value: &str) -> Option<f64> {
        self.scores.get(value).copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Returns the keys that are not members of `system`.
    pub fn unknown_values<'a>(&'a self, system: &ValueSystem) -> Vec<&'a str> {
        self.scores
            .keys()
            .filter(|k| !system.contains(k))
            .map(String::as_str)
            .collect()
    }
}
