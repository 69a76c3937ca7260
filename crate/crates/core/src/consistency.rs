//! Correlations between preference vectors, agreement between decision
//! conditions, and framework roll-ups.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::attributes::ValueAttributeRow;
use crate::error::{Error, Result};
use crate::model::{Decision, ModeTag, PreferenceVector};
use crate::values::ValueSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Pearson,
    Spearman,
    Agreement,
}

impl std::fmt::Display for Statistic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Statistic::Pearson => "pearson",
            Statistic::Spearman => "spearman",
            Statistic::Agreement => "agreement",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub pair: String,
    pub statistic: Statistic,
    pub value: f64,
    pub n_common: usize,
}

impl ConsistencyReport {
    pub fn with_pair(mut self, pair: impl Into<String>) -> Self {
        self.pair = pair.into();
        self
    }
}

/// Scores of both vectors over their common keys, in key order.
fn common(a: &PreferenceVector, b: &PreferenceVector) -> (Vec<f64>, Vec<f64>) {
    a.scores
        .iter()
        .filter_map(|(k, &x)| b.scores.get(k).map(|&y| (x, y)))
        .unzip()
}

/// Sample Pearson correlation of two equal-length slices.
pub fn pearson_slices(x: &[f64], y: &[f64]) -> Result<f64> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return Err(Error::TooFewCommon { found: n });
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance { side: "first vector" });
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance { side: "second vector" });
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied entries share the mean of the ranks they span.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| x[i].total_cmp(&x[j]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && x[order[end]] == x[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

pub fn spearman_slices(x: &[f64], y: &[f64]) -> Result<f64> {
    pearson_slices(&average_ranks(x), &average_ranks(y))
}

fn pair_label(a: &PreferenceVector, b: &PreferenceVector) -> String {
    format!("{} vs {}", a.mode, b.mode)
}

pub fn pearson(a: &PreferenceVector, b: &PreferenceVector) -> Result<ConsistencyReport> {
    let (x, y) = common(a, b);
    Ok(ConsistencyReport {
        pair: pair_label(a, b),
        statistic: Statistic::Pearson,
        value: pearson_slices(&x, &y)?,
        n_common: x.len(),
    })
}

pub fn spearman(a: &PreferenceVector, b: &PreferenceVector) -> Result<ConsistencyReport> {
    let (x, y) = common(a, b);
    Ok(ConsistencyReport {
        pair: pair_label(a, b),
        statistic: Statistic::Spearman,
        value: spearman_slices(&x, &y)?,
        n_common: x.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleConsistency {
    pub mean_spearman: f64,
    pub pairs_used: usize,
    pub pairs_skipped: usize,
}

/// Mean Spearman correlation over all unordered pairs of `vectors`, summed
/// in `(i, j)` order. Pairs that fail the correlation preconditions are
/// skipped and counted.
pub fn pairwise_sample_consistency(vectors: &[PreferenceVector]) -> Result<SampleConsistency> {
    if vectors.len() < 2 {
        return Err(Error::Precondition(format!(
            "sample consistency needs at least 2 vectors, got {}",
            vectors.len()
        )));
    }
    let (mut sum, mut used, mut skipped) = (0.0, 0, 0);
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            match spearman(&vectors[i], &vectors[j]) {
                Ok(r) => {
                    sum += r.value;
                    used += 1;
                }
                Err(_) => skipped += 1,
            }
        }
    }
    if used == 0 {
        return Err(Error::Precondition(format!("all {skipped} vector pairs were degenerate")));
    }
    Ok(SampleConsistency {
        mean_spearman: sum / used as f64,
        pairs_used: used,
        pairs_skipped: skipped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub fraction: f64,
    pub joined: usize,
    pub same: usize,
}

/// Fraction of dilemmas, present with a parsed choice in both lists, where
/// the implicit and explicit decisions coincide.
pub fn agreement_fraction(implicit: &[Decision], explicit: &[Decision]) -> Result<Agreement> {
    let mut lookup = HashMap::new();
    for d in explicit {
        if let Some(c) = d.choice {
            lookup.entry(d.dilemma_id.as_str()).or_insert(c);
        }
    }
    let mut seen = BTreeSet::new();
    let (mut joined, mut same) = (0, 0);
    for d in implicit {
        let (Some(c), Some(&other)) = (d.choice, lookup.get(d.dilemma_id.as_str())) else {
            continue;
        };
        if !seen.insert(d.dilemma_id.as_str()) {
            continue;
        }
        joined += 1;
        if c == other {
            same += 1;
        }
    }
    if joined == 0 {
        return Err(Error::Precondition("no dilemma has a decision in both conditions".into()));
    }
    Ok(Agreement {
        fraction: same as f64 / joined as f64,
        joined,
        same,
    })
}

/// Coarse categories, each made of fine-grained values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameworkMap {
    pub name: String,
    pub groups: BTreeMap<String, BTreeSet<String>>,
}

impl FrameworkMap {
    pub fn unknown_members(&self, system: &ValueSystem) -> Vec<(&str, &str)> {
        self.groups
            .iter()
            .flat_map(|(g, ms)| ms.iter().map(move |m| (g.as_str(), m.as_str())))
            .filter(|(_, m)| !system.contains(m))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollupEntry {
    pub score: f64,
    pub n_members_scored: usize,
}

/// Mean score of each coarse value over its scored members; categories
/// with no scored member are omitted.
pub fn rollup_framework(scores: &BTreeMap<String, f64>, fw: &FrameworkMap) -> BTreeMap<String, RollupEntry> {
    fw.groups
        .iter()
        .filter_map(|(coarse, members)| {
            let vals: Vec<f64> = members.iter().filter_map(|m| scores.get(m).copied()).collect();
            (!vals.is_empty()).then(|| {
                (
                    coarse.clone(),
                    RollupEntry {
                        score: vals.iter().sum::<f64>() / vals.len() as f64,
                        n_members_scored: vals.len(),
                    },
                )
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribute {
    SpecificityPath,
    SpecificityAttr,
    CompressionRatio,
}

impl Attribute {
    pub fn of(self, row: &ValueAttributeRow) -> Option<f64> {
        match self {
            Attribute::SpecificityPath => row.mean_specificity_path,
            Attribute::SpecificityAttr => row.mean_specificity_attr,
            Attribute::CompressionRatio => row.compression_ratio,
        }
    }
}

impl std::fmt::Display for Attribute {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Attribute::SpecificityPath => "specificity_path",
            Attribute::SpecificityAttr => "specificity_attr",
            Attribute::CompressionRatio => "compression_ratio",
        })
    }
}

/// One attribute as a vector over the values that have it.
pub fn attribute_vector(attrs: &[ValueAttributeRow], attribute: Attribute) -> Result<PreferenceVector> {
    let scores = attrs
        .iter()
        .filter_map(|r| attribute.of(r).map(|x| (r.value.clone(), x)))
        .collect();
    PreferenceVector::new(ModeTag::External, scores)
}

/// Pearson correlation between an attribute and preference scores over the
/// values carrying both.
pub fn attribute_preference_correlation(
    attrs: &[ValueAttributeRow],
    prefs: &PreferenceVector,
    attribute: Attribute,
) -> Result<ConsistencyReport> {
    let v = attribute_vector(attrs, attribute)?;
    Ok(pearson(&v, prefs)?.with_pair(format!("{attribute} vs {}", prefs.mode)))
}
