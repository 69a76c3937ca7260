use std::collections::BTreeMap;

use valuescope_core::synth::{
    agent_decide, agent_longform, kendall_distance, ordered_weights, recover, recovery_check, round_robin_corpus,
    Pipeline, PlantedAgent,
};
use valuescope_core::{Action, Choice, DilemmaRecord};

fn agent(weights: &[(&str, f64)], noise: f64, seed: u64) -> PlantedAgent {
    PlantedAgent {
        weights: weights.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        noise_sigma: noise,
        seed,
    }
}

fn dilemma(id: String, a: &[&str], b: &[&str]) -> DilemmaRecord {
    let act = |vs: &[&str]| Action {
        text: String::new(),
        values: vs.iter().map(|s| s.to_string()).collect(),
    };
    DilemmaRecord {
        id,
        scenario: String::new(),
        action1: act(a),
        action2: act(b),
    }
}

/// Mean and standard error of the Kendall distance over 1000 seeds.
fn kendall_stats(sigma: f64) -> (f64, f64) {
    let rec = dilemma("k".into(), &["c", "a"], &["b"]);
    let ds: Vec<f64> = (0..1000u64)
        .map(|seed| {
            let ag = agent(&[("a", 3.0), ("b", 2.0), ("c", 1.0)], sigma, seed);
            let r = agent_longform(&ag, &rec, 3, 0).unwrap();
            let order: Vec<&str> = r.arguments.iter().map(|a| a.values[0].as_str()).collect();
            kendall_distance(&ag, &order).unwrap() as f64
        })
        .collect();
    let mean = ds.iter().sum::<f64>() / ds.len() as f64;
    let var = ds.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (ds.len() - 1) as f64;
    (mean, (var / ds.len() as f64).sqrt())
}

#[test]
fn kendall_distance_shrinks_with_noise() {
    // Expected distance: sum over pairs of Phi(-gap / (sigma * sqrt 2)).
    let expected = [
        (4.0, 1.2215206001145477),
        (2.0, 0.9634236709252398),
        (1.0, 0.558_149_725_712_096),
        (0.5, 0.15963807454080876),
        (0.25, 0.004677742689676216),
    ];
    let mut previous = f64::INFINITY;
    for (sigma, want) in expected {
        let (mean, se) = kendall_stats(sigma);
        assert!((mean - want).abs() <= 4.0 * se.max(0.005), "sigma {sigma}: {mean} vs {want}");
        assert!(mean <= previous, "sigma {sigma}: {mean} above {previous}");
        previous = mean;
    }
    assert_eq!(kendall_stats(0.0).0, 0.0);
}

#[test]
fn noisy_decisions_match_recorded_sequence() {
    let ag = agent(&[("a", 0.4), ("b", 0.3), ("c", 0.2), ("d", 0.1)], 0.3, 2024);
    let names = ["a", "b", "c", "d"];
    let pairs: Vec<(&str, &str)> = names
        .iter()
        .flat_map(|x| names.iter().filter(move |y| *y != x).map(move |y| (*x, *y)))
        .collect();
    let seq: String = pairs
        .iter()
        .enumerate()
        .map(|(i, (x, y))| match agent_decide(&ag, &dilemma(format!("n{i:02}"), &[x], &[y])).unwrap().choice {
            Some(Choice::Action1) => '1',
            _ => '2',
        })
        .collect();
    assert_eq!(seq, "111221111222");
}

#[test]
fn dominant_sum_wins_without_noise() {
    let ag = agent(&[("a", 0.9), ("b", 0.1)], 0.0, 1);
    assert_eq!(agent_decide(&ag, &dilemma("x".into(), &["b"], &["a"])).unwrap().choice, Some(Choice::Action2));
}

#[test]
fn scaling_by_ten_keeps_decisions_and_ranking() {
    let w = ordered_weights(8, 1.0);
    let values: Vec<String> = w.keys().cloned().collect();
    let corpus = round_robin_corpus(84, &values, 5).unwrap();
    let base = PlantedAgent {
        weights: w.clone(),
        noise_sigma: 0.8,
        seed: 11,
    };
    let scaled = PlantedAgent {
        weights: w.iter().map(|(k, v)| (k.clone(), v * 10.0)).collect(),
        noise_sigma: 8.0,
        seed: 11,
    };
    for r in &corpus {
        assert_eq!(agent_decide(&base, r).unwrap().choice, agent_decide(&scaled, r).unwrap().choice);
    }
    let rank = |pv: valuescope_core::PreferenceVector| {
        let mut v: Vec<(String, f64)> = pv.scores.into_iter().collect();
        v.sort_by(|a, b| b.1.total_cmp(&a.1));
        v.into_iter().map(|(k, _)| k).collect::<Vec<_>>()
    };
    assert_eq!(
        rank(recover(&corpus, &base, Pipeline::Short).unwrap()),
        rank(recover(&corpus, &scaled, Pipeline::Short).unwrap())
    );
}

#[test]
fn zero_noise_recovery_on_pinned_corpus() {
    let w = ordered_weights(20, 1.0);
    let values: Vec<String> = w.keys().cloned().collect();
    let corpus = round_robin_corpus(500, &values, 0).unwrap();
    let ag = PlantedAgent {
        weights: w,
        noise_sigma: 0.0,
        seed: 0,
    };
    for p in [Pipeline::Short, Pipeline::Long { k: 10 }] {
        let rep = recovery_check(&corpus, &ag, p).unwrap();
        assert_eq!(rep.spearman, 1.0, "{p:?}");
        assert_eq!(rep.n_values, 20);
    }
}

#[test]
fn single_value_corpus_is_degenerate() {
    let ag = PlantedAgent {
        weights: BTreeMap::from([("a".to_string(), 1.0)]),
        noise_sigma: 0.0,
        seed: 0,
    };
    let corpus = vec![dilemma("x".into(), &["a"], &["a"])];
    assert!(recovery_check(&corpus, &ag, Pipeline::Short).is_err());
}
