//! Judge-backed annotation and model-response generation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use valuescope_core::{ArgumentRecord, Condition, Decision, DilemmaRecord, ResponseRecord, ValueSystem};

use crate::chat::{ChatRequest, FewShot, Message};
use crate::client::Gateway;
use crate::error::{GatewayError, Result};
use crate::template::TemplateId;

pub const MAX_ASSIGNED_VALUES: usize = 5;

const JSON_LIST_NUDGE: &str =
    "The previous output was not a valid JSON list. Reply with only the JSON list of {\"argument\": ...} objects.";
const VALUES_NUDGE: &str =
    "The previous output did not contain any values. Reply in the format: List supporting values: value, value, ...";
const SCORE_NUDGE: &str = "The previous output did not contain a score between 1 and 5. Reply with the score only.";
const ATTR_NUDGE: &str = "The previous output was not a JSON object with an integer score between 1 and 5. \
Reply with only {\"score\": <1-5>, \"explanation\": \"...\"}.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecVariant {
    Path,
    Attr,
}

impl SpecVariant {
    pub fn template(self) -> TemplateId {
        match self {
            SpecVariant::Path => TemplateId::SpecPath,
            SpecVariant::Attr => TemplateId::SpecAttr,
        }
    }
}

/// Argument texts from a judge reply: a JSON list of `{"argument": ...}`
/// objects (bare strings also accepted), possibly wrapped in prose or a code
/// fence.
pub fn parse_argument_list(text: &str) -> Option<Vec<String>> {
    let (start, end) = (text.find('[')?, text.rfind(']')?);
    if end < start {
        return None;
    }
    let items: Vec<Value> = serde_json::from_str(&text[start..=end]).ok()?;
    items
        .into_iter()
        .map(|v| match v {
            Value::String(s) => Some(s),
            Value::Object(mut m) => match m.remove("argument") {
                Some(Value::String(s)) => Some(s),
                _ => None,
            },
            _ => None,
        })
        .collect()
}

fn clean_name(raw: &str) -> String {
    let s = raw.trim();
    let s = s.trim_start_matches(|c: char| c == '-' || c == '*' || c == '•' || c.is_whitespace());
    let digits = s.chars().take_while(|c| c.is_ascii_digit()).count();
    let s = if digits > 0 && s[digits..].starts_with(['.', ')']) {
        &s[digits + 1..]
    } else {
        s
    };
    s.trim()
        .trim_matches(|c: char| matches!(c, '"' | '\'' | '`' | '[' | ']' | '.' | '*') || c.is_whitespace())
        .to_string()
}

/// Value names from a judge reply, in the judge's order, without repeats.
pub fn parse_value_list(text: &str) -> Vec<String> {
    if let Some(names) = text
        .find('[').zip(text.rfind(']'))
        .filter(|(s, e)| s < e)
        .and_then(|(s, e)| serde_json::from_str::<Vec<String>>(&text[s..=e]).ok())
    {
        return dedup(names.iter().map(|n| clean_name(n)));
    }
    let body = match text.to_ascii_lowercase().find("supporting values") {
        Some(i) => {
            let after = &text[i..];
            match after.find(':') {
                Some(c) => &after[c + 1..],
                None => &after["supporting values".len()..],
            }
        }
        None => text,
    };
    dedup(body.split([',', '\n', ';']).map(clean_name))
}

fn dedup(names: impl Iterator<Item = String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for n in names {
        if !n.is_empty() && !out.contains(&n) {
            out.push(n);
        }
    }
    out
}

fn json_object(text: &str) -> Option<serde_json::Map<String, Value>> {
    let (s, e) = (text.find('{')?, text.rfind('}')?);
    if e < s {
        return None;
    }
    serde_json::from_str(&text[s..=e]).ok()
}

fn integer_after(text: &str, label: &str) -> Option<i64> {
    let lower = text.to_ascii_lowercase();
    let i = lower.find(label)? + label.len();
    let rest = text[i..].trim_start_matches(|c: char| c == ':' || c == '*' || c == '=' || c.is_whitespace());
    let digits: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
    digits.parse().ok()
}

/// Raw path-variant score: a JSON `score`, a labelled score, or a bare
/// integer. Range is checked by the caller.
pub fn parse_path_score(text: &str) -> Option<i64> {
    if let Some(n) = json_object(text).and_then(|m| m.get("score").and_then(Value::as_i64)) {
        return Some(n);
    }
    for label in ["score", "specificity level", "specificity", "level"] {
        if let Some(n) = integer_after(text, label) {
            return Some(n);
        }
    }
    text.trim().trim_end_matches('.').parse().ok()
}

/// Raw attribute-variant score from the JSON object contract.
pub fn parse_attr_score(text: &str) -> Option<i64> {
    json_object(text)?.get("score")?.as_i64()
}

fn in_range(n: Option<i64>) -> Option<u8> {
    n.filter(|n| (1..=5).contains(n)).map(|n| n as u8)
}

/// The judge's single standardized value name.
pub fn parse_standardized(text: &str) -> String {
    let line = text.trim().lines().next().unwrap_or("").trim();
    let line = ["answer:", "value:", "closest value:"]
        .iter()
        .find_map(|p| {
            line.to_ascii_lowercase()
                .starts_with(p)
                .then(|| &line[p.len()..])
        })
        .unwrap_or(line);
    clean_name(line)
}

pub fn values_binding(system: &ValueSystem) -> String {
    system.names().join(", ")
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValueAssignment {
    pub values: Vec<String>,
    pub warnings: Vec<String>,
}

/// Sends annotation prompts to a judge model.
pub struct Judge<'a> {
    pub gateway: &'a Gateway,
    pub endpoint: String,
    pub model_id: String,
    pub temperature: f64,
    pub max_tokens: Option<u32>,
}

impl<'a> Judge<'a> {
    pub fn new(gateway: &'a Gateway, endpoint: impl Into<String>, model_id: impl Into<String>) -> Self {
        Self {
            gateway,
            endpoint: endpoint.into(),
            model_id: model_id.into(),
            temperature: 0.0,
            max_tokens: None,
        }
    }

    fn request(&self, messages: Vec<Message>) -> ChatRequest {
        ChatRequest {
            endpoint: self.endpoint.clone(),
            model_id: self.model_id.clone(),
            messages,
            temperature: self.temperature,
            max_tokens: self.max_tokens,
            sample_idx: 0,
        }
    }

    /// Asks once and, if `parse` rejects the reply, re-asks once in the same
    /// conversation.
    fn ask_with_retry<T>(&self, prompt: String, nudge: &str, parse: impl Fn(&str) -> Option<T>) -> Result<(Option<T>, String)> {
        let first = self.gateway.chat(&self.request(vec![Message::user(&prompt)]))?.text;
        if let Some(v) = parse(&first) {
            return Ok((Some(v), first));
        }
        let second = self
            .gateway
            .chat(&self.request(vec![Message::user(prompt), Message::assistant(&first), Message::user(nudge)]))?
            .text;
        Ok((parse(&second), second))
    }

    pub fn extract_arguments(&self, response_text: &str) -> Result<Vec<String>> {
        let prompt = TemplateId::ExtractArguments.render(&BTreeMap::from([("response", response_text.to_string())]))?;
        match self.ask_with_retry(prompt, JSON_LIST_NUDGE, parse_argument_list)? {
            (Some(args), _) => Ok(args),
            (None, text) => Err(GatewayError::Malformed {
                what: "argument list",
                text,
            }),
        }
    }

    /// Up to five member values. Unknown names get one standardization call
    /// and are dropped if that fails.
    pub fn assign_values(&self, argument: &str, system: &ValueSystem) -> Result<ValueAssignment> {
        let prompt = TemplateId::AssignValues.render(&BTreeMap::from([
            ("values", values_binding(system)),
            ("argument", argument.to_string()),
        ]))?;
        let (names, _) = self.ask_with_retry(prompt, VALUES_NUDGE, |t| {
            let v = parse_value_list(t);
            (!v.is_empty()).then_some(v)
        })?;
        let mut out = ValueAssignment::default();
        let mut names = names.unwrap_or_default();
        if names.len() > MAX_ASSIGNED_VALUES {
            out.warnings.push(format!(
                "judge returned {} values, keeping the first {MAX_ASSIGNED_VALUES}",
                names.len()
            ));
            names.truncate(MAX_ASSIGNED_VALUES);
        }
        for name in names {
            let resolved = match system.resolve(&name) {
                Some(v) => Some(v.to_string()),
                None => match self.standardize_value(&name, system) {
                    Ok(v) => Some(v),
                    Err(GatewayError::OutsideSystem { answer }) => {
                        out.warnings.push(format!("dropped `{name}`: standardized to non-member `{answer}`"));
                        None
                    }
                    Err(e) => return Err(e),
                },
            };
            if let Some(v) = resolved {
                if !out.values.contains(&v) {
                    out.values.push(v);
                }
            }
        }
        if out.values.is_empty() {
            out.warnings.push("no values assigned".into());
        }
        Ok(out)
    }

    /// Score in 1..=5, or `None` when the judge fails twice.
    pub fn judge_specificity(&self, argument: &str, variant: SpecVariant) -> Result<Option<u8>> {
        let prompt = variant
            .template()
            .render(&BTreeMap::from([("argument", argument.to_string())]))?;
        let (score, _) = match variant {
            SpecVariant::Path => self.ask_with_retry(prompt, SCORE_NUDGE, |t| in_range(parse_path_score(t)))?,
            SpecVariant::Attr => self.ask_with_retry(prompt, ATTR_NUDGE, |t| in_range(parse_attr_score(t)))?,
        };
        Ok(score)
    }

    /// Members resolve without a judge call; anything else must come back
    /// as a member.
    pub fn standardize_value(&self, name: &str, system: &ValueSystem) -> Result<String> {
        if let Some(v) = system.resolve(name) {
            return Ok(v.to_string());
        }
        let prompt = TemplateId::StandardizeValue.render(&BTreeMap::from([
            ("values", values_binding(system)),
            ("value", name.trim().to_string()),
        ]))?;
        let answer = parse_standardized(&self.gateway.chat(&self.request(vec![Message::user(prompt)]))?.text);
        system
            .resolve(&answer)
            .map(str::to_string)
            .ok_or(GatewayError::OutsideSystem { answer })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotateOptions {
    pub specificity: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub arguments: Vec<ArgumentRecord>,
    pub warnings: Vec<String>,
    /// Indices of arguments left without any value.
    pub unvalued: Vec<u32>,
}

/// Extracts, value-tags and optionally scores every argument of one response.
pub fn annotate_response(
    judge: &Judge<'_>,
    response: &ResponseRecord,
    system: &ValueSystem,
    opts: AnnotateOptions,
) -> Result<Annotation> {
    let texts = judge.extract_arguments(&response.text)?;
    let mut out = Annotation::default();
    if texts.is_empty() {
        out.warnings.push(format!("{}: no arguments extracted (m = 0)", response.response_id));
    }
    for (i, text) in texts.into_iter().enumerate() {
        let index = i as u32 + 1;
        let assignment = judge.assign_values(&text, system)?;
        for w in assignment.warnings {
            out.warnings.push(format!("{} #{index}: {w}", response.response_id));
        }
        if assignment.values.is_empty() {
            out.unvalued.push(index);
        }
        let (spec_path, spec_attr) = if opts.specificity {
            (
                judge.judge_specificity(&text, SpecVariant::Path)?,
                judge.judge_specificity(&text, SpecVariant::Attr)?,
            )
        } else {
            (None, None)
        };
        out.arguments.push(ArgumentRecord {
            response_id: response.response_id.clone(),
            index,
            text,
            values: assignment.values,
            spec_path,
            spec_attr,
        });
    }
    Ok(out)
}

/// Prompts the model under study.
pub struct Generator<'a> {
    pub gateway: &'a Gateway,
    pub endpoint: String,
    pub model_id: String,
    pub temperature: f64,
    pub max_tokens: Option<u32>,
    pub few_shot: Vec<FewShot>,
}

impl<'a> Generator<'a> {
    fn request(&self, prompt: String, sample_idx: u32) -> ChatRequest {
        ChatRequest {
            endpoint: self.endpoint.clone(),
            model_id: self.model_id.clone(),
            messages: vec![Message::user(prompt)],
            temperature: self.temperature,
            max_tokens: self.max_tokens,
            sample_idx,
        }
        .with_few_shot(&self.few_shot)
    }

    pub fn short_form_prompt(record: &DilemmaRecord, condition: Condition) -> Result<String> {
        match condition {
            Condition::Implicit => {
                TemplateId::ShortForm.render(&BTreeMap::from([("Dilemma", record.scenario.clone())]))
            }
            Condition::Explicit => TemplateId::ShortFormWithValues.render(&BTreeMap::from([
                ("Dilemma", record.scenario.clone()),
                ("action1_values", record.action1.values.join(", ")),
                ("action2_values", record.action2.values.join(", ")),
            ])),
        }
    }

    pub fn short_form(&self, record: &DilemmaRecord, condition: Condition, sample_idx: u32) -> Result<Decision> {
        let prompt = Self::short_form_prompt(record, condition)?;
        let text = self.gateway.chat(&self.request(prompt, sample_idx))?.text;
        Ok(Decision::from_raw(record.id.clone(), condition, text))
    }

    pub fn long_form(&self, source_id: &str, question: &str, k: u32, sample_idx: u32) -> Result<ResponseRecord> {
        let prompt = TemplateId::LongForm.render(&BTreeMap::from([
            ("k", k.to_string()),
            ("question", question.to_string()),
        ]))?;
        let text = self.gateway.chat(&self.request(prompt, sample_idx))?.text;
        Ok(ResponseRecord {
            response_id: format!("{}:{source_id}-k{k}-s{sample_idx}", self.model_id),
            source_record_id: source_id.to_string(),
            model_id: self.model_id.clone(),
            mode: "long_form".into(),
            k,
            temperature: self.temperature,
            sample_idx,
            text,
        })
    }
}
