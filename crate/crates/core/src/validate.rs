use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::model::DilemmaRecord;
use crate::values::ValueSystem;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Issue {
    UnknownValue { value: String, action: u8 },
    EmptyValueSet { action: u8 },
    DuplicateId,
    EmptyId,
    /// Both actions list the same value.
    Overlap { value: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub record_id: String,
    /// 0-based position of the record in its input.
    pub position: usize,
    pub issue: Issue,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub records: usize,
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

impl std::fmt::Display for Finding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "record `{}` (#{}): ", self.record_id, self.position + 1)?;
        match &self.issue {
            Issue::UnknownValue { value, action } => {
                write!(f, "action{action} value `{value}` is not in the value system")
            }
            Issue::EmptyValueSet { action } => write!(f, "action{action} has no values"),
            Issue::DuplicateId => f.write_str("duplicate id"),
            Issue::EmptyId => f.write_str("empty id"),
            Issue::Overlap { value } => write!(f, "`{value}` appears in both actions"),
        }
    }
}

/// Checks every record against `system`. Unknown values, empty sets and
/// duplicate ids are errors; values shared by both actions are warnings.
pub fn validate_corpus(records: &[DilemmaRecord], system: &ValueSystem) -> ValidationReport {
    let mut report = ValidationReport {
        records: records.len(),
        ..Default::default()
    };
    let mut seen = HashSet::new();
    for (position, rec) in records.iter().enumerate() {
        let mut push = |issue: Issue, error: bool| {
            let f = Finding {
                record_id: rec.id.clone(),
                position,
                issue,
            };
            if error {
                report.errors.push(f);
            } else {
                report.warnings.push(f);
            }
        };
        if rec.id.trim().is_empty() {
            push(Issue::EmptyId, true);
        } else if !seen.insert(rec.id.as_str()) {
            push(Issue::DuplicateId, true);
        }
        for (n, action) in [(1u8, &rec.action1), (2u8, &rec.action2)] {
            if action.values.is_empty() {
                push(Issue::EmptyValueSet { action: n }, true);
            }
            for v in &action.values {
                if !system.contains(v) {
                    push(
                        Issue::UnknownValue {
                            value: v.clone(),
                            action: n,
                        },
                        true,
                    );
                }
            }
        }
        for v in &rec.action1.values {
            if rec.action2.values.contains(v) {
                push(Issue::Overlap { value: v.clone() }, false);
            }
        }
    }
    report
}
