//! Long-form preferences from argument order.
//!
//! For every response that mentions a value, the value's first argument
//! index divided by the response's argument count gives a normalized
//! position. The preference score is the negated mean position, so values
//! argued earlier score higher.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AnnotatedResponse, ModeTag, PreferenceVector};

/// Whether argument positions are counted from 1 (default) or 0 when
/// normalizing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexBase {
    #[default]
    One,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionObservation {
    pub value: String,
    pub response_id: String,
    /// 1-based index of the first argument carrying `value`.
    pub first_index: u32,
    pub m: u32,
    pub normalized: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Positions {
    pub observations: Vec<PositionObservation>,
    /// Responses without arguments.
    pub skipped: Vec<String>,
}

/// One observation per (value, response) pair, sorted by value then
/// response id.
pub fn first_occurrence_positions(responses: &[AnnotatedResponse], base: IndexBase) -> Positions {
    let mut out = Positions::default();
    for resp in responses {
        let m = resp.m();
        if m == 0 {
            out.skipped.push(resp.response_id.clone());
            continue;
        }
        let mut first: BTreeMap<&str, u32> = BTreeMap::new();
        for arg in &resp.arguments {
            for v in &arg.values {
                first
                    .entry(v.as_str())
                    .and_modify(|i| *i = (*i).min(arg.index))
                    .or_insert(arg.index);
            }
        }
        for (value, idx) in first {
            let offset = match base {
                IndexBase::One => idx as f64,
                IndexBase::Zero => (idx - 1) as f64,
            };
            out.observations.push(PositionObservation {
                value: value.to_string(),
                response_id: resp.response_id.clone(),
                first_index: idx,
                m: m as u32,
                normalized: offset / m as f64,
            });
        }
    }
    out.observations
        .sort_by(|a, b| (&a.value, &a.response_id).cmp(&(&b.value, &b.response_id)));
    out
}

/// `score[v] = -mean(normalized position of v)`.
pub fn longform_preferences(observations: &[PositionObservation], k: u32) -> Result<PreferenceVector> {
    if observations.is_empty() {
        return Err(Error::Precondition("no position observations".into()));
    }
    let mut acc: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for o in observations {
        let e = acc.entry(o.value.as_str()).or_insert((0.0, 0));
        e.0 += o.normalized;
        e.1 += 1;
    }
    let scores = acc
        .into_iter()
        .map(|(v, (sum, n))| (v.to_string(), -(sum / n as f64)))
        .collect();
    PreferenceVector::new(ModeTag::LongForm { k }, scores)
}
