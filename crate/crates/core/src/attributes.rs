//! Per-value generation attributes: judged specificity and the gzip
//! compression ratio of the pooled arguments (higher ratio, less diverse).

use std::collections::BTreeMap;
use std::io::Write;

use flate2::write::GzEncoder;
use flate2::{Compression, GzBuilder};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::AnnotatedResponse;

pub const DEFAULT_COMPRESSION_LEVEL: u32 = 6;

/// An argument text with the key that fixes its place in the pool.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PooledText {
    pub response_id: String,
    pub index: u32,
    pub text: String,
}

impl PooledText {
    pub fn new(response_id: impl Into<String>, index: u32, text: impl Into<String>) -> Self {
        Self {
            response_id: response_id.into(),
            index,
            text: text.into(),
        }
    }
}

/// Size of `data` once wrapped in a gzip container at `level`.
pub fn gzip_len(data: &[u8], level: u32) -> usize {
    let mut enc: GzEncoder<Vec<u8>> = GzBuilder::new().mtime(0).write(Vec::new(), Compression::new(level));
    enc.write_all(data).expect("writing to a Vec cannot fail");
    enc.finish().expect("writing to a Vec cannot fail").len()
}

/// Texts sorted by `(response_id, index)` and joined with `\n`.
pub fn canonical_concatenation(items: &[PooledText]) -> String {
    let mut sorted: Vec<&PooledText> = items.iter().collect();
    sorted.sort_by(|a, b| (&a.response_id, a.index).cmp(&(&b.response_id, b.index)));
    sorted
        .iter()
        .map(|p| p.text.as_str())
        .collect::<Vec<_>>()
        .join("\n")
}

/// Uncompressed over gzip-compressed byte length of the canonical
/// concatenation.
pub fn compression_ratio(items: &[PooledText], level: u32) -> Result<f64> {
    if items.iter().all(|p| p.text.is_empty()) {
        return Err(Error::Precondition(
            "compression ratio needs at least one non-empty text".into(),
        ));
    }
    if level > 9 {
        return Err(Error::Domain(format!("compression level {level} outside 0..=9")));
    }
    let joined = canonical_concatenation(items);
    Ok(joined.len() as f64 / gzip_len(joined.as_bytes(), level) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueAttributeRow {
    pub value: String,
    pub n_arguments: usize,
    pub mean_specificity_path: Option<f64>,
    pub mean_specificity_attr: Option<f64>,
    pub compression_ratio: Option<f64>,
    /// Arguments excluded from the path mean for lack of a score.
    #[serde(default)]
    pub missing_path: usize,
    #[serde(default)]
    pub missing_attr: usize,
}

impl ValueAttributeRow {
    fn empty(value: &str) -> Self {
        Self {
            value: value.to_string(),
            n_arguments: 0,
            mean_specificity_path: None,
            mean_specificity_attr: None,
            compression_ratio: None,
            missing_path: 0,
            missing_attr: 0,
        }
    }
}

/// Every argument's text pooled under each value it carries.
fn pools(responses: &[AnnotatedResponse]) -> BTreeMap<&str, Vec<PooledText>> {
    let mut pools: BTreeMap<&str, Vec<PooledText>> = BTreeMap::new();
    for r in responses {
        for a in &r.arguments {
            let mut seen: Vec<&str> = Vec::new();
            for v in &a.values {
                if seen.contains(&v.as_str()) {
                    continue;
                }
                seen.push(v);
                pools
                    .entry(v.as_str())
                    .or_default()
                    .push(PooledText::new(r.response_id.clone(), a.index, a.text.clone()));
            }
        }
    }
    pools
}

/// Compression ratio per value. Values with fewer than two arguments get a
/// row without a ratio.
pub fn diversity_per_value(responses: &[AnnotatedResponse], level: u32) -> Result<Vec<ValueAttributeRow>> {
    pools(responses)
        .into_iter()
        .map(|(value, pool)| {
            let mut row = ValueAttributeRow::empty(value);
            row.n_arguments = pool.len();
            if pool.len() >= 2 && pool.iter().any(|p| !p.text.is_empty()) {
                row.compression_ratio = Some(compression_ratio(&pool, level)?);
            }
            Ok(row)
        })
        .collect()
}

#[derive(Default)]
struct MeanAcc {
    sum: u64,
    n: usize,
    missing: usize,
}

impl MeanAcc {
    fn push(&mut self, s: Option<u8>) {
        match s {
            Some(s) => {
                self.sum += s as u64;
                self.n += 1;
            }
            None => self.missing += 1,
        }
    }

    fn mean(&self) -> Option<f64> {
        (self.n > 0).then(|| self.sum as f64 / self.n as f64)
    }
}

/// Mean judged specificity per value, path and attribute variants
/// separately. Unscored arguments are left out of the mean and counted.
pub fn specificity_per_value(responses: &[AnnotatedResponse]) -> Vec<ValueAttributeRow> {
    let mut acc: BTreeMap<&str, (usize, MeanAcc, MeanAcc)> = BTreeMap::new();
    for r in responses {
        for a in &r.arguments {
            let mut seen: Vec<&str> = Vec::new();
            for v in &a.values {
                if seen.contains(&v.as_str()) {
                    continue;
                }
                seen.push(v);
                let e = acc.entry(v.as_str()).or_default();
                e.0 += 1;
                e.1.push(a.specificity_path);
                e.2.push(a.specificity_attr);
            }
        }
    }
    acc.into_iter()
        .map(|(value, (n, path, attr))| ValueAttributeRow {
            value: value.to_string(),
            n_arguments: n,
            mean_specificity_path: path.mean(),
            mean_specificity_attr: attr.mean(),
            compression_ratio: None,
            missing_path: path.missing,
            missing_attr: attr.missing,
        })
        .collect()
}

/// Specificity and diversity merged into one row per value.
pub fn value_attributes(responses: &[AnnotatedResponse], level: u32) -> Result<Vec<ValueAttributeRow>> {
    let diversity = diversity_per_value(responses, level)?;
    let mut rows = specificity_per_value(responses);
    for (row, div) in rows.iter_mut().zip(diversity) {
        debug_assert_eq!(row.value, div.value);
        row.compression_ratio = div.compression_ratio;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Argument;

    fn resp(id: &str, args: Vec<(&str, &[&str], Option<u8>)>) -> AnnotatedResponse {
        AnnotatedResponse {
            response_id: id.into(),
            source_record_id: "d".into(),
            model_id: "m".into(),
            k_requested: args.len() as u32,
            temperature: 0.0,
            sample_idx: 0,
            full_text: String::new(),
            arguments: args
                .into_iter()
                .enumerate()
                .map(|(i, (text, vs, s))| Argument {
                    index: i as u32 + 1,
                    text: text.into(),
                    values: vs.iter().map(|s| s.to_string()).collect(),
                    specificity_path: s,
                    specificity_attr: None,
                })
                .collect(),
        }
    }

    #[test]
    fn all_empty_is_an_error() {
        assert!(compression_ratio(&[PooledText::new("r", 1, "")], 6).is_err());
        assert!(compression_ratio(&[], 6).is_err());
    }

    #[test]
    fn duplicate_text_raises_ratio() {
        let text = "Respecting a friend's privacy preserves trust between you.";
        let single = compression_ratio(&[PooledText::new("a", 1, text)], 6).unwrap();
        let rs = [resp("a", vec![(text, &["Privacy"], None)]), resp("b", vec![(text, &["Privacy"], None)])];
        let rows = diversity_per_value(&rs, 6).unwrap();
        assert!(rows[0].compression_ratio.unwrap() > single);
    }

    #[test]
    fn single_argument_has_no_ratio() {
        let rows = diversity_per_value(&[resp("a", vec![("text", &["Privacy"], None)])], 6).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].n_arguments, 1);
        assert_eq!(rows[0].compression_ratio, None);
    }

    #[test]
    fn specificity_means() {
        let rows = specificity_per_value(&[resp("a", vec![("t", &["Privacy"], Some(3))])]);
        assert_eq!(rows[0].mean_specificity_path, Some(3.0));

        let rows = specificity_per_value(&[resp(
            "a",
            vec![("t", &["Privacy"], Some(1)), ("u", &["Privacy"], Some(5)), ("w", &["Privacy"], None)],
        )]);
        assert_eq!(rows[0].mean_specificity_path, Some(3.0));
        assert_eq!(rows[0].n_arguments, 3);
        assert_eq!(rows[0].missing_path, 1);
        assert_eq!(rows[0].mean_specificity_attr, None);
        assert_eq!(rows[0].missing_attr, 3);
    }

    #[test]
    fn concatenation_is_sorted_by_key() {
        let items = [
            PooledText::new("b", 1, "third"),
            PooledText::new("a", 2, "second"),
            PooledText::new("a", 1, "first"),
        ];
        assert_eq!(canonical_concatenation(&items), "first\nsecond\nthird");
    }
}
