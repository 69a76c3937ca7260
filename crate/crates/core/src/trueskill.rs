//! Gaussian preference beliefs updated by two-team TrueSkill matches.
//!
//! Each value carries a belief `N(mu, sigma^2)`. A short-form decision is a
//! match in which the chosen action's value set beat the other action's set;
//! team performance is the sum of per-value performances, each perturbed by
//! `N(0, beta^2)`. The analytic two-team update below is exact for this
//! factor graph, so no message-passing loop is needed.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{inv_cdf, truncated_gaussian_moments};
use crate::model::{DilemmaRecord, ModeTag, PreferenceVector, Decision};

/// Smallest sigma a belief may reach; smaller values are clamped.
pub const SIGMA_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrueSkillParams {
    pub mu0: f64,
    pub sigma0: f64,
    pub beta: f64,
    pub tau: f64,
    pub p_draw: f64,
}

impl Default for TrueSkillParams {
    fn default() -> Self {
        Self {
            mu0: 25.0,
            sigma0: 25.0 / 3.0,
            beta: 25.0 / 6.0,
            tau: 25.0 / 300.0,
            p_draw: 0.10,
        }
    }
}

impl TrueSkillParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.mu0.is_finite()
            && self.sigma0.is_finite()
            && self.sigma0 > 0.0
            && self.beta.is_finite()
            && self.beta > 0.0
            && self.tau.is_finite()
            && self.tau >= 0.0
            && (0.0..1.0).contains(&self.p_draw);
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid TrueSkill parameters {self:?}")))
        }
    }

    /// Draw margin `ε = Φ⁻¹((p_draw + 1) / 2) · √n · β` for `n` participants.
    pub fn draw_margin(&self, participants: usize) -> f64 {
        inv_cdf((self.p_draw + 1.0) / 2.0) * (participants as f64).sqrt() * self.beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Belief {
    pub mu: f64,
    pub sigma: f64,
}

/// Snapshot of every value's belief. Values never seen in a match are absent
/// and read back as the prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefState {
    pub params: TrueSkillParams,
    pub beliefs: BTreeMap<String, Belief>,
    pub match_count: u64,
}

/// The chosen action's values (`winners`) beat the other action's values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchOutcome {
    pub winners: Vec<String>,
    pub losers: Vec<String>,
    pub source_dilemma_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Team {
    Winner,
    Loser,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueDelta {
    pub value: String,
    pub team: Team,
    pub delta_mu: f64,
    pub sigma_before: f64,
    pub sigma_after: f64,
}

/// Audit record of one update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchTrace {
    pub dilemma_id: String,
    pub c: f64,
    pub t: f64,
    pub eps: f64,
    pub d: f64,
    pub v: f64,
    pub w: f64,
    /// Sigma after the tau inflation, per participant.
    pub inflated_sigma: BTreeMap<String, f64>,
    pub deltas: Vec<ValueDelta>,
    /// Values whose sigma hit [`SIGMA_FLOOR`].
    pub clamped: Vec<String>,
}

fn dedup(names: &[String]) -> Vec<&str> {
    let mut out: Vec<&str> = Vec::with_capacity(names.len());
    for n in names {
        if !out.contains(&n.as_str()) {
            out.push(n);
        }
    }
    out
}

impl BeliefState {
    pub fn new(params: TrueSkillParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            beliefs: BTreeMap::new(),
            match_count: 0,
        })
    }

    pub fn prior(&self) -> Belief {
        Belief {
            mu: self.params.mu0,
            sigma: self.params.sigma0,
        }
    }

    pub fn belief(&self, value: &str) -> Belief {
        self.beliefs.get(value).copied().unwrap_or_else(|| self.prior())
    }

    /// Applies one match and returns the new snapshot with its trace.
    ///
    /// A value present in both sets plays on both teams: both of its deltas
    /// are computed against the pre-match snapshot and applied winner first.
    pub fn update_two_team(&self, outcome: &MatchOutcome) -> Result<(BeliefState, MatchTrace)> {
        let winners = dedup(&outcome.winners);
        let losers = dedup(&outcome.losers);
        if winners.is_empty() || losers.is_empty() {
            return Err(Error::Precondition(format!(
                "match `{}` has an empty team",
                outcome.source_dilemma_id
            )));
        }
        let p = &self.params;
        let tau2 = p.tau * p.tau;

        let mut inflated: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
        for &name in winners.iter().chain(&losers) {
            let b = self.belief(name);
            inflated.insert(name, (b.mu, b.sigma * b.sigma + tau2));
        }

        let n = winners.len() + losers.len();
        let team_mu = |team: &[&str]| team.iter().map(|n| inflated[n].0).sum::<f64>();
        let team_var = |team: &[&str]| team.iter().map(|n| inflated[n].1).sum::<f64>();
        let c2 = team_var(&winners) + team_var(&losers) + n as f64 * p.beta * p.beta;
        let c = c2.sqrt();
        let t = (team_mu(&winners) - team_mu(&losers)) / c;
        let eps = p.draw_margin(n);
        let d = t - eps / c;
        let (v, w) = truncated_gaussian_moments(d)?;

        let mut next = self.clone();
        let mut deltas = Vec::with_capacity(n);
        let mut clamped = Vec::new();
        let mut touched: BTreeMap<&str, (f64, f64)> = inflated.clone();
        for (team, members, sign) in [(Team::Winner, &winners, 1.0), (Team::Loser, &losers, -1.0)] {
            for &name in members.iter() {
                let (_, var) = inflated[name];
                let delta_mu = sign * var / c * v;
                let factor = 1.0 - var / c2 * w;
                let entry = touched.get_mut(name).expect("participant");
                let sigma_before = entry.1.sqrt();
                entry.0 += delta_mu;
                entry.1 *= factor;
                deltas.push(ValueDelta {
                    value: name.to_string(),
                    team,
                    delta_mu,
                    sigma_before,
                    sigma_after: entry.1.sqrt(),
                });
            }
        }
        for (name, (mu, var)) in touched {
            let mut sigma = var.sqrt();
            if !(sigma >= SIGMA_FLOOR) {
                sigma = SIGMA_FLOOR;
                clamped.push(name.to_string());
            }
            next.beliefs.insert(name.to_string(), Belief { mu, sigma });
        }
        next.match_count += 1;

        let trace = MatchTrace {
            dilemma_id: outcome.source_dilemma_id.clone(),
            c,
            t,
            eps,
            d,
            v,
            w,
            inflated_sigma: inflated
                .iter()
                .map(|(k, (_, var))| (k.to_string(), var.sqrt()))
                .collect(),
            deltas,
            clamped,
        };
        Ok((next, trace))
    }
}

/// Result of folding a decision list into a belief state.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessOutcome {
    pub state: BeliefState,
    pub applied: usize,
    /// Decisions whose answer could not be parsed.
    pub skipped: Vec<String>,
    pub traces: Vec<MatchTrace>,
}

/// Folds [`BeliefState::update_two_team`] over `decisions` in input order.
pub fn process_decisions(
    state: &BeliefState,
    records: &[DilemmaRecord],
    decisions: &[Decision],
) -> Result<ProcessOutcome> {
    let by_id: HashMap<&str, &DilemmaRecord> = records.iter().map(|r| (r.id.as_str(), r)).collect();
    let mut current = state.clone();
    let mut traces = Vec::new();
    let mut skipped = Vec::new();
    let mut applied = 0;
    for decision in decisions {
        let record = by_id
            .get(decision.dilemma_id.as_str())
            .ok_or_else(|| Error::UnknownDilemma(decision.dilemma_id.clone()))?;
        let Some(choice) = decision.choice else {
            skipped.push(decision.dilemma_id.clone());
            continue;
        };
        let outcome = MatchOutcome {
            winners: record.action(choice).values.clone(),
            losers: record.action(choice.other()).values.clone(),
            source_dilemma_id: record.id.clone(),
        };
        let (next, trace) = current.update_two_team(&outcome)?;
        current = next;
        traces.push(trace);
        applied += 1;
    }
    Ok(ProcessOutcome {
        state: current,
        applied,
        skipped,
        traces,
    })
}

/// Short-form preferences: each participating value's `mu`.
pub fn preference_vector_from_beliefs(state: &BeliefState) -> Result<PreferenceVector> {
    if state.match_count == 0 {
        return Err(Error::NoMatches);
    }
    let scores = state.beliefs.iter().map(|(k, b)| (k.clone(), b.mu)).collect();
    PreferenceVector::new(ModeTag::ShortForm, scores)
}

/// Rounds to `places` decimals, ties to even.
pub fn round_half_even(x: f64, places: i32) -> f64 {
    let scale = 10f64.powi(places);
    let scaled = x * scale;
    let floor = scaled.floor();
    let diff = scaled - floor;
    let r = if diff > 0.5 {
        floor + 1.0
    } else if diff < 0.5 {
        floor
    } else if floor % 2.0 == 0.0 {
        floor
    } else {
        floor + 1.0
    };
    r / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn fresh() -> BeliefState {
        BeliefState::new(TrueSkillParams::default()).unwrap()
    }

    fn outcome(w: &[&str], l: &[&str]) -> MatchOutcome {
        MatchOutcome {
            winners: names(w),
            losers: names(l),
            source_dilemma_id: "x".into(),
        }
    }

    #[test]
    fn one_vs_one_matches_closed_form() {
        // 50-digit evaluation of the same closed form.
        let (s, _) = fresh().update_two_team(&outcome(&["A"], &["B"])).unwrap();
        let a = s.belief("A");
        let b = s.belief("B");
        assert!((a.mu - 29.395_831_692_991_513).abs() < 1e-9);
        assert!((b.mu - 20.604_168_307_008_487).abs() < 1e-9);
        assert!((a.sigma - 7.171_475_807_009_221).abs() < 1e-9);
        assert_eq!(a.sigma, b.sigma);
        assert_eq!(a.mu - 25.0, 25.0 - b.mu);
    }

    #[test]
    fn empty_team_is_rejected() {
        assert!(fresh().update_two_team(&outcome(&[], &["B"])).is_err());
        assert!(fresh().update_two_team(&outcome(&["A"], &[])).is_err());
    }

    #[test]
    fn overlap_joins_both_teams() {
        let (s, t) = fresh()
            .update_two_team(&outcome(&["Honesty", "Courage"], &["Honesty", "Privacy"]))
            .unwrap();
        assert_eq!(t.deltas.len(), 4);
        let h = s.belief("Honesty");
        assert!((h.mu - 25.0).abs() < 1e-12);
        assert!(h.sigma < s.belief("Courage").sigma);
        assert!(s.belief("Courage").mu > 25.0 && s.belief("Privacy").mu < 25.0);
    }

    #[test]
    fn sigma_floor_is_applied() {
        let mut p = TrueSkillParams::default();
        p.sigma0 = 1e-7;
        p.tau = 0.0;
        let st = BeliefState::new(p).unwrap();
        let (s, t) = st.update_two_team(&outcome(&["A"], &["B"])).unwrap();
        assert_eq!(s.belief("A").sigma, SIGMA_FLOOR);
        assert_eq!(t.clamped, names(&["A", "B"]));
    }

    #[test]
    fn fresh_state_has_no_preferences() {
        assert!(matches!(preference_vector_from_beliefs(&fresh()), Err(Error::NoMatches)));
    }

    #[test]
    fn invalid_params() {
        let mut p = TrueSkillParams::default();
        p.p_draw = 1.0;
        assert!(BeliefState::new(p).is_err());
        p = TrueSkillParams::default();
        p.beta = 0.0;
        assert!(BeliefState::new(p).is_err());
    }

    #[test]
    fn half_even_rounding() {
        assert_eq!(round_half_even(2.5, 0), 2.0);
        assert_eq!(round_half_even(3.5, 0), 4.0);
        assert_eq!(round_half_even(25.013_029_5, 3), 25.013);
        assert_eq!(round_half_even(7.933_599_7, 3), 7.934);
    }
}
