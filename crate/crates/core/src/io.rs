//! File formats: JSONL record streams and versioned single-document JSON,
//! all written in canonical form (sorted keys, shortest round-trip floats,
//! LF line endings) through an atomic rename.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{
    Action, AnnotatedResponse, ArgumentRecord, Decision, DilemmaRecord, OpenQuestionRecord, ResponseRecord,
};
use crate::validate::{validate_corpus, ValidationReport};
use crate::values::ValueSystem;

pub const SCHEMA_VERSION: u32 = 1;

/// Lowercase hex SHA-256 of `bytes`.
pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn canonicalize(v: Value) -> Value {
    match v {
        Value::Object(map) => {
            let sorted: BTreeMap<String, Value> = map.into_iter().map(|(k, v)| (k, canonicalize(v))).collect();
            Value::Object(sorted.into_iter().collect::<Map<_, _>>())
        }
        Value::Array(xs) => Value::Array(xs.into_iter().map(canonicalize).collect()),
        other => other,
    }
}

/// Compact JSON with object keys sorted at every level.
pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    Ok(serde_json::to_string(&canonicalize(serde_json::to_value(value)?))?)
}

/// Pretty-printed canonical JSON, newline-terminated.
pub fn to_canonical_json_pretty<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&canonicalize(serde_json::to_value(value)?))?;
    s.push('\n');
    Ok(s)
}

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Records of a JSONL stream plus non-fatal notes (blank lines).
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded<T> {
    pub records: Vec<T>,
    pub warnings: Vec<String>,
}

pub fn parse_jsonl<T: DeserializeOwned>(text: &str, path: &Path) -> Result<Loaded<T>> {
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            warnings.push(format!("{}:{}: blank line skipped", path.display(), i + 1));
            continue;
        }
        let rec = serde_json::from_str(line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        records.push(rec);
    }
    Ok(Loaded { records, warnings })
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Loaded<T>> {
    parse_jsonl(&read_to_string(path)?, path)
}

pub fn jsonl_string<T: Serialize>(records: &[T]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&to_canonical_json(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    write_atomic(path, jsonl_string(records)?.as_bytes())
}

pub struct LoadedDilemmas {
    pub records: Vec<DilemmaRecord>,
    pub warnings: Vec<String>,
    pub report: ValidationReport,
}

/// Dilemmas in file order, validated against `system`.
pub fn load_dilemmas(path: &Path, system: &ValueSystem) -> Result<LoadedDilemmas> {
    let loaded: Loaded<DilemmaRecord> = read_jsonl(path)?;
    let report = validate_corpus(&loaded.records, system);
    Ok(LoadedDilemmas {
        records: loaded.records,
        warnings: loaded.warnings,
        report,
    })
}

pub fn load_questions(path: &Path) -> Result<Loaded<OpenQuestionRecord>> {
    let loaded: Loaded<OpenQuestionRecord> = read_jsonl(path)?;
    for (i, q) in loaded.records.iter().enumerate() {
        if q.question.trim().is_empty() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("question `{}` is empty", q.id),
            });
        }
    }
    Ok(loaded)
}

pub fn load_decisions(path: &Path) -> Result<Vec<Decision>> {
    Ok(read_jsonl(path)?.records)
}

pub fn load_responses(path: &Path) -> Result<Vec<ResponseRecord>> {
    Ok(read_jsonl(path)?.records)
}

pub fn load_arguments(path: &Path) -> Result<Vec<ArgumentRecord>> {
    Ok(read_jsonl(path)?.records)
}

/// Joins responses with their arguments. Responses without arguments come
/// back with `m = 0`; arguments of unknown responses are an error.
pub fn assemble_responses(
    responses: &[ResponseRecord],
    arguments: Vec<ArgumentRecord>,
) -> Result<Vec<AnnotatedResponse>> {
    let mut grouped: BTreeMap<String, Vec<ArgumentRecord>> = BTreeMap::new();
    for a in arguments {
        grouped.entry(a.response_id.clone()).or_default().push(a);
    }
    let mut out = Vec::with_capacity(responses.len());
    for r in responses {
        let args = grouped.remove(&r.response_id).unwrap_or_default();
        out.push(AnnotatedResponse::from_records(r, args)?);
    }
    if let Some(id) = grouped.keys().next() {
        return Err(Error::Domain(format!("arguments reference unknown response `{id}`")));
    }
    Ok(out)
}

/// Serializes `doc` as a JSON object with a `schema_version` field.
pub fn document_string<T: Serialize>(doc: &T) -> Result<String> {
    let mut v = serde_json::to_value(doc)?;
    let Value::Object(map) = &mut v else {
        return Err(Error::Domain("documents must serialize to JSON objects".into()));
    };
    map.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    to_canonical_json_pretty(&v)
}

pub fn save_document<T: Serialize>(path: &Path, doc: &T) -> Result<()> {
    write_atomic(path, document_string(doc)?.as_bytes())
}

pub fn parse_document<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T> {
    let mut v: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })?;
    let found = v
        .get("schema_version")
        .and_then(Value::as_u64)
        .map(|n| n as u32)
        .unwrap_or(0);
    if found != SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            path: path.to_path_buf(),
            found,
            expected: SCHEMA_VERSION,
        });
    }
    if let Value::Object(map) = &mut v {
        map.remove("schema_version");
    }
    serde_json::from_value(v).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 1,
        message: e.to_string(),
    })
}

pub fn load_document<T: DeserializeOwned>(path: &Path) -> Result<T> {
    parse_document(&read_to_string(path)?, path)
}

fn str_field<'a>(row: &'a Value, keys: &[&str]) -> Option<&'a Value> {
    keys.iter().find_map(|k| row.get(*k))
}

fn as_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Accepts a JSON list of names or a string holding such a list, either as
/// JSON or Python-literal (`['a', 'b']`), or comma separated.
fn as_value_list(v: &Value) -> Vec<String> {
    match v {
        Value::Array(xs) => xs.iter().map(as_text).map(|s| s.trim().to_string()).collect(),
        Value::String(s) => {
            let t = s.trim();
            if let Ok(xs) = serde_json::from_str::<Vec<String>>(t) {
                return xs;
            }
            t.trim_start_matches('[')
                .trim_end_matches(']')
                .split(',')
                .map(|x| x.trim().trim_matches(|c| c == '\'' || c == '"').trim().to_string())
                .filter(|x| !x.is_empty())
                .collect()
        }
        _ => Vec::new(),
    }
}

/// Groups per-action rows of the upstream dilemma dataset (one row per
/// action, `action_type` of `to_do` / `not_to_do`) into [`DilemmaRecord`]s,
/// in order of first appearance. Rows already in the native shape pass
/// through.
pub fn adapt_daily_dilemmas(rows: &[Value]) -> Result<Vec<DilemmaRecord>> {
    let mut order: Vec<String> = Vec::new();
    let mut parts: BTreeMap<String, (String, Option<Action>, Option<Action>)> = BTreeMap::new();
    for (i, row) in rows.iter().enumerate() {
        if row.get("action1").is_some() {
            let rec: DilemmaRecord = serde_json::from_value(row.clone())?;
            order.push(rec.id.clone());
            parts.insert(rec.id.clone(), (rec.scenario, Some(rec.action1), Some(rec.action2)));
            continue;
        }
        let id = str_field(row, &["dilemma_idx", "idx", "id"])
            .map(as_text)
            .ok_or_else(|| Error::Domain(format!("row {}: no dilemma id", i + 1)))?;
        let scenario = str_field(row, &["dilemma_situation", "scenario", "situation"])
            .map(as_text)
            .unwrap_or_default();
        let action = Action {
            text: str_field(row, &["action", "text"]).map(as_text).unwrap_or_default(),
            values: str_field(row, &["values_aggregated", "values"])
                .map(as_value_list)
                .unwrap_or_default(),
        };
        let kind = str_field(row, &["action_type", "type"]).map(as_text).unwrap_or_default();
        let entry = parts.entry(id.clone()).or_insert_with(|| {
            order.push(id.clone());
            (scenario.clone(), None, None)
        });
        match kind.as_str() {
            "to_do" | "action1" => entry.1 = Some(action),
            "not_to_do" | "action2" => entry.2 = Some(action),
            other => return Err(Error::Domain(format!("row {}: unknown action type `{other}`", i + 1))),
        }
    }
    order
        .into_iter()
        .map(|id| {
            let (scenario, a1, a2) = parts.remove(&id).expect("grouped above");
            match (a1, a2) {
                (Some(action1), Some(action2)) => Ok(DilemmaRecord {
                    id,
                    scenario,
                    action1,
                    action2,
                }),
                _ => Err(Error::Domain(format!("dilemma `{id}` is missing one of its actions"))),
            }
        })
        .collect()
}

/// Maps upstream survey-question rows onto [`OpenQuestionRecord`]s.
pub fn adapt_opinion_qa(rows: &[Value]) -> Result<Vec<OpenQuestionRecord>> {
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            let question = str_field(row, &["question", "question_text"])
                .map(as_text)
                .filter(|q| !q.trim().is_empty())
                .ok_or_else(|| Error::Domain(format!("row {}: no question text", i + 1)))?;
            Ok(OpenQuestionRecord {
                id: str_field(row, &["id", "qkey", "key"])
                    .map(as_text)
                    .unwrap_or_else(|| format!("q{}", i + 1)),
                topic: str_field(row, &["topic", "category", "survey"])
                    .map(as_text)
                    .unwrap_or_default(),
                question,
            })
        })
        .collect()
}
