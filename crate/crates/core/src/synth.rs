//! Planted-preference simulation for checking the extraction pipelines
//! without a language model.
//!
//! All randomness comes from [`SplitMix64`] (Steele, Lea & Flood 2014) with
//! increment `0x9E3779B97F4A7C15` and finalizer multipliers
//! `0xBF58476D1CE4E5B9` / `0x94D049BB133111EB` (shifts 30, 27, 31).
//! Uniforms take the top 53 bits; normals use Box-Muller (cosine branch
//! only) with `libm` transcendental functions, so streams are identical on
//! every platform. Per-record streams are seeded with
//! `seed ^ fnv1a64(stream name)`, FNV-1a with offset `0xcbf29ce484222325`
//! and prime `0x100000001b3`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::consistency::spearman;
use crate::error::{Error, Result};
use crate::longform::{first_occurrence_positions, longform_preferences, IndexBase};
use crate::model::{
    Action, AnnotatedResponse, Argument, Choice, Condition, Decision, DilemmaRecord, ModeTag, PreferenceVector,
};
use crate::trueskill::{preference_vector_from_beliefs, process_decisions, BeliefState, TrueSkillParams};

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw.
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * std::f64::consts::PI * u2)
    }

    /// Uniform integer in `0..n` (n > 0), by rejection.
    pub fn below(&mut self, n: u64) -> u64 {
        let zone = u64::MAX - u64::MAX % n;
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % n;
            }
        }
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Generator for one named stream under a run seed.
pub fn stream(seed: u64, name: &str) -> SplitMix64 {
    SplitMix64::new(seed ^ fnv1a64(name.as_bytes()))
}

/// A simulated model with ground-truth value weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedAgent {
    pub weights: BTreeMap<String, f64>,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl PlantedAgent {
    fn weight(&self, value: &str) -> Result<f64> {
        self.weights
            .get(value)
            .copied()
            .ok_or_else(|| Error::Precondition(format!("planted agent has no weight for `{value}`")))
    }

    fn sum(&self, action: &Action) -> Result<f64> {
        action.values.iter().map(|v| self.weight(v)).sum()
    }

    pub fn planted_vector(&self) -> Result<PreferenceVector> {
        PreferenceVector::new(ModeTag::External, self.weights.clone())
    }
}

/// Picks the action whose weight sum plus `N(0, noise_sigma²)` is larger;
/// ties go to action 1.
pub fn agent_decide(agent: &PlantedAgent, record: &DilemmaRecord) -> Result<Decision> {
    let mut rng = stream(agent.seed, &format!("decide/{}", record.id));
    let s1 = agent.sum(&record.action1)? + agent.noise_sigma * rng.next_gaussian();
    let s2 = agent.sum(&record.action2)? + agent.noise_sigma * rng.next_gaussian();
    let choice = if s1 >= s2 { Choice::Action1 } else { Choice::Action2 };
    let raw = match choice {
        Choice::Action1 => "Action 1",
        Choice::Action2 => "Action 2",
    };
    Ok(Decision {
        dilemma_id: record.id.clone(),
        choice: Some(choice),
        condition: Condition::Implicit,
        raw_text: raw.into(),
    })
}

const OPENERS: [&str; 6] = [
    "Above all, this choice honours",
    "A further consideration is",
    "It is also worth weighing",
    "Another reason to act is",
    "One should not overlook",
    "The situation also calls for",
];

const CLOSERS: [&str; 6] = [
    "because the people involved depend on it.",
    "since the consequences reach beyond this single moment.",
    "as it shapes how trust develops over time.",
    "given what each person stands to lose.",
    "which keeps the relationship on honest footing.",
    "even if it costs something in the short run.",
];

/// A `k`-argument response whose arguments follow the record's values in
/// descending noisy weight; if `k` exceeds the number of values the order
/// repeats.
pub fn agent_longform(agent: &PlantedAgent, record: &DilemmaRecord, k: u32, sample_idx: u32) -> Result<AnnotatedResponse> {
    if k < 1 {
        return Err(Error::Precondition("k must be at least 1".into()));
    }
    let mut rng = stream(agent.seed, &format!("long/{}/{k}/{sample_idx}", record.id));
    let mut ranked: Vec<(f64, &str)> = record
        .all_values()
        .into_iter()
        .map(|v| Ok((agent.weight(v)? + agent.noise_sigma * rng.next_gaussian(), v)))
        .collect::<Result<_>>()?;
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(b.1)));
    let arguments: Vec<Argument> = (0..k as usize)
        .map(|i| {
            let value = ranked[i % ranked.len()].1;
            let text = format!(
                "{} {} {}",
                OPENERS[rng.below(OPENERS.len() as u64) as usize],
                value.to_lowercase(),
                CLOSERS[rng.below(CLOSERS.len() as u64) as usize]
            );
            Argument {
                index: i as u32 + 1,
                text,
                values: vec![value.to_string()],
                specificity_path: None,
                specificity_attr: None,
            }
        })
        .collect();
    let full_text = arguments
        .iter()
        .map(|a| format!("{}. {}", a.index, a.text))
        .collect::<Vec<_>>()
        .join("\n");
    Ok(AnnotatedResponse {
        response_id: format!("{}-k{k}-s{sample_idx}", record.id),
        source_record_id: record.id.clone(),
        model_id: "planted-agent".into(),
        k_requested: k,
        temperature: 0.0,
        sample_idx,
        full_text,
        arguments,
    })
}

/// Assigns path and attribute specificity that falls linearly from 5 at the
/// highest planted weight to 1 at the lowest, plus `N(0, noise²)`, rounded
/// and clamped to 1..=5.
pub fn plant_anticorrelated_specificity(
    agent: &PlantedAgent,
    responses: &mut [AnnotatedResponse],
    noise: f64,
) -> Result<()> {
    let lo = agent.weights.values().copied().fold(f64::INFINITY, f64::min);
    let hi = agent.weights.values().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    for r in responses.iter_mut() {
        let mut rng = stream(agent.seed, &format!("spec/{}", r.response_id));
        for a in &mut r.arguments {
            let Some(v) = a.values.first() else { continue };
            let w = agent.weight(v)?;
            let mut score = || {
                let raw = 5.0 - 4.0 * (w - lo) / span + noise * rng.next_gaussian();
                raw.round().clamp(1.0, 5.0) as u8
            };
            a.specificity_path = Some(score());
            a.specificity_attr = Some(score());
        }
    }
    Ok(())
}

/// `n` dilemmas, each pitting two disjoint random value sets of size
/// `1..=max_set` against each other.
pub fn synth_corpus(n: usize, values: &[String], max_set: usize, seed: u64) -> Result<Vec<DilemmaRecord>> {
    if values.len() < 2 {
        return Err(Error::Precondition("a synthetic corpus needs at least 2 values".into()));
    }
    let max_set = max_set.clamp(1, values.len() / 2);
    let mut rng = stream(seed, "corpus");
    (0..n)
        .map(|i| {
            let a = 1 + rng.below(max_set as u64) as usize;
            let b = 1 + rng.below(max_set as u64) as usize;
            // partial Fisher-Yates for a + b distinct picks
            let mut pool: Vec<&String> = values.iter().collect();
            for j in 0..a + b {
                let pick = j + rng.below((pool.len() - j) as u64) as usize;
                pool.swap(j, pick);
            }
            let set = |xs: &[&String]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
            Ok(DilemmaRecord {
                id: format!("syn-{i:05}"),
                scenario: format!("Synthetic dilemma {i}."),
                action1: Action {
                    text: "Do it.".into(),
                    values: set(&pool[..a]),
                },
                action2: Action {
                    text: "Do not.".into(),
                    values: set(&pool[a..a + b]),
                },
            })
        })
        .collect()
}

/// `n` one-against-one dilemmas built from complete round robins: every
/// unordered value pair appears once per round, rounds are shuffled
/// independently and the side of each value is a coin flip. The last round
/// is partial when `n` is not a multiple of the pair count.
pub fn round_robin_corpus(n: usize, values: &[String], seed: u64) -> Result<Vec<DilemmaRecord>> {
    if values.len() < 2 {
        return Err(Error::Precondition("a synthetic corpus needs at least 2 values".into()));
    }
    let pairs: Vec<(usize, usize)> = (0..values.len())
        .flat_map(|i| (i + 1..values.len()).map(move |j| (i, j)))
        .collect();
    let mut rng = stream(seed, "corpus");
    let mut round: Vec<(usize, usize)> = Vec::new();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        if round.is_empty() {
            round = pairs.clone();
            for j in 0..round.len() {
                let pick = j + rng.below((round.len() - j) as u64) as usize;
                round.swap(j, pick);
            }
            round.reverse();
        }
        let (a, b) = round.pop().expect("round refilled above");
        let (a, b) = if rng.below(2) == 1 { (b, a) } else { (a, b) };
        out.push(DilemmaRecord {
            id: format!("syn-{i:05}"),
            scenario: format!("Synthetic dilemma {i}."),
            action1: Action {
                text: "Do it.".into(),
                values: vec![values[a].clone()],
            },
            action2: Action {
                text: "Do not.".into(),
                values: vec![values[b].clone()],
            },
        });
    }
    Ok(out)
}

/// Weights `n-1, n-2, ..., 0` (scaled by `scale`) for values `v00..`.
pub fn ordered_weights(n: usize, scale: f64) -> BTreeMap<String, f64> {
    (0..n).map(|i| (format!("v{i:02}"), scale * (n - 1 - i) as f64)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    /// TrueSkill over short-form decisions.
    Short,
    /// Normalized argument position over long-form responses with `k` arguments.
    Long { k: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub pipeline: Pipeline,
    pub spearman: f64,
    pub n_values: usize,
    pub recovered: PreferenceVector,
}

pub fn recover(corpus: &[DilemmaRecord], agent: &PlantedAgent, pipeline: Pipeline) -> Result<PreferenceVector> {
    match pipeline {
        Pipeline::Short => {
            let decisions = corpus
                .iter()
                .map(|r| agent_decide(agent, r))
                .collect::<Result<Vec<_>>>()?;
            let state = BeliefState::new(TrueSkillParams::default())?;
            let out = process_decisions(&state, corpus, &decisions)?;
            preference_vector_from_beliefs(&out.state)
        }
        Pipeline::Long { k } => {
            let responses = corpus
                .iter()
                .map(|r| agent_longform(agent, r, k, 0))
                .collect::<Result<Vec<_>>>()?;
            let pos = first_occurrence_positions(&responses, IndexBase::One);
            longform_preferences(&pos.observations, k)
        }
    }
}

/// Spearman correlation between the recovered and the planted preferences.
pub fn recovery_check(corpus: &[DilemmaRecord], agent: &PlantedAgent, pipeline: Pipeline) -> Result<RecoveryReport> {
    let distinct: std::collections::BTreeSet<&str> =
        corpus.iter().flat_map(|r| r.all_values()).collect();
    if distinct.len() < 2 {
        return Err(Error::Precondition("corpus uses fewer than 2 distinct values".into()));
    }
    let recovered = recover(corpus, agent, pipeline)?;
    let report = spearman(&recovered, &agent.planted_vector()?)?;
    Ok(RecoveryReport {
        pipeline,
        spearman: report.value,
        n_values: report.n_common,
        recovered,
    })
}

/// Number of value pairs ordered differently in `order` than in descending
/// planted weight.
pub fn kendall_distance(agent: &PlantedAgent, order: &[&str]) -> Result<usize> {
    let w: Vec<f64> = order.iter().map(|v| agent.weight(v)).collect::<Result<_>>()?;
    let mut d = 0;
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            if w[i] < w[j] {
                d += 1;
            }
        }
    }
    Ok(d)
}

/// Agent whose planted weights are all equal, so any recovered order is noise.
pub fn null_agent(values: &[String], noise_sigma: f64, seed: u64) -> PlantedAgent {
    PlantedAgent {
        weights: values.iter().map(|v| (v.clone(), 0.0)).collect(),
        noise_sigma,
        seed,
    }
}

/// Spearman between what `pipeline` recovers from a null agent and the
/// fixed reference order given by `reference` weights.
pub fn null_spearman(
    corpus: &[DilemmaRecord],
    agent: &PlantedAgent,
    reference: &BTreeMap<String, f64>,
    pipeline: Pipeline,
) -> Result<f64> {
    let recovered = recover(corpus, agent, pipeline)?;
    let reference = PreferenceVector::new(ModeTag::External, reference.clone())?;
    Ok(spearman(&recovered, &reference)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_stream() {
        // First outputs for seed 1234567, from the published reference code.
        let mut g = SplitMix64::new(1_234_567);
        assert_eq!(g.next_u64(), 6_457_827_717_110_365_317);
        assert_eq!(g.next_u64(), 3_203_168_211_198_807_973);
        assert_eq!(g.next_u64(), 9_817_491_932_198_370_423);
    }

    fn agent(weights: &[(&str, f64)], noise: f64) -> PlantedAgent {
        PlantedAgent {
            weights: weights.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            noise_sigma: noise,
            seed: 42,
        }
    }

    fn dilemma(a: &[&str], b: &[&str]) -> DilemmaRecord {
        let act = |vs: &[&str]| Action {
            text: String::new(),
            values: vs.iter().map(|s| s.to_string()).collect(),
        };
        DilemmaRecord {
            id: "d".into(),
            scenario: String::new(),
            action1: act(a),
            action2: act(b),
        }
    }

    #[test]
    fn decide_by_weight_sum() {
        let ag = agent(&[("a", 0.5), ("b", 0.4), ("c", 0.1)], 0.0);
        assert_eq!(agent_decide(&ag, &dilemma(&["c"], &["a", "b"])).unwrap().choice, Some(Choice::Action2));
        assert_eq!(agent_decide(&ag, &dilemma(&["a", "b"], &["c"])).unwrap().choice, Some(Choice::Action1));
    }

    #[test]
    fn tie_goes_to_action_one() {
        let ag = agent(&[("a", 0.5), ("b", 0.5)], 0.0);
        assert_eq!(agent_decide(&ag, &dilemma(&["b"], &["a"])).unwrap().choice, Some(Choice::Action1));
    }

    #[test]
    fn uncovered_value_is_an_error() {
        let ag = agent(&[("a", 0.5)], 0.0);
        assert!(agent_decide(&ag, &dilemma(&["a"], &["zzz"])).is_err());
    }

    #[test]
    fn longform_orders_by_weight() {
        let ag = agent(&[("a", 3.0), ("b", 2.0), ("c", 1.0)], 0.0);
        let r = agent_longform(&ag, &dilemma(&["c", "a"], &["b"]), 3, 0).unwrap();
        let order: Vec<_> = r.arguments.iter().map(|a| a.values[0].as_str()).collect();
        assert_eq!(order, ["a", "b", "c"]);
        let r = agent_longform(&ag, &dilemma(&["c", "a"], &["b"]), 1, 0).unwrap();
        assert_eq!(r.arguments.len(), 1);
        assert_eq!(r.arguments[0].values, ["a"]);
        assert!(agent_longform(&ag, &dilemma(&["a"], &["b"]), 0, 0).is_err());
    }

    #[test]
    fn corpus_sets_are_disjoint() {
        let values: Vec<String> = ordered_weights(20, 1.0).into_keys().collect();
        for r in synth_corpus(200, &values, 4, 3).unwrap() {
            assert!(!r.action1.values.is_empty() && r.action1.values.len() <= 4);
            assert!(r.action1.values.iter().all(|v| !r.action2.values.contains(v)));
        }
        assert!(synth_corpus(3, &values[..1], 2, 3).is_err());
    }

    #[test]
    fn round_robin_covers_each_pair_once_per_round() {
        let values: Vec<String> = ordered_weights(6, 1.0).into_keys().collect();
        let corpus = round_robin_corpus(30, &values, 9).unwrap();
        let mut counts: BTreeMap<(String, String), usize> = BTreeMap::new();
        for r in &corpus {
            let (a, b) = (r.action1.values[0].clone(), r.action2.values[0].clone());
            assert_ne!(a, b);
            *counts.entry(if a < b { (a, b) } else { (b, a) }).or_default() += 1;
        }
        assert_eq!(counts.len(), 15);
        assert!(counts.values().all(|&c| c == 2));
    }

    #[test]
    fn kendall_counts_inversions() {
        let ag = agent(&[("a", 3.0), ("b", 2.0), ("c", 1.0)], 0.0);
        assert_eq!(kendall_distance(&ag, &["a", "b", "c"]).unwrap(), 0);
        assert_eq!(kendall_distance(&ag, &["c", "b", "a"]).unwrap(), 3);
        assert_eq!(kendall_distance(&ag, &["b", "a", "c"]).unwrap(), 1);
    }
}
