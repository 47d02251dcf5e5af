//! Epsilon-greedy exploration over deterministic payoffs, and the
//! security-guard scenario where exploration-based value estimates diverge
//! from on-policy values because the environment reads the agent's policy
//! rather than its sampled action.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Per-action running statistics. Estimates are exact arithmetic means of
/// the observed payoffs.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ActionStats {
    pub samples: u64,
    pub mean: f64,
}

impl ActionStats {
    fn observe(&mut self, payoff: f64) {
        self.samples += 1;
        self.mean += (payoff - self.mean) / self.samples as f64;
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpsilonExplorer {
    pub epsilon: f64,
    pub episodes: u64,
    pub seed: u64,
    pub stats: BTreeMap<String, ActionStats>,
    /// Actions that were never sampled; when nonempty the run may have
    /// locked onto an early favorite and the estimates cannot converge.
    pub never_sampled: Vec<String>,
}

impl EpsilonExplorer {
    pub fn estimate(&self, action: &str) -> Option<f64> {
        self.stats
            .get(action)
            .filter(|s| s.samples > 0)
            .map(|s| s.mean)
    }

    pub fn samples(&self, action: &str) -> u64 {
        self.stats.get(action).map_or(0, |s| s.samples)
    }

    pub fn greedy_action(&self) -> Option<&str> {
        self.stats
            .iter()
            .max_by(|a, b| a.1.mean.total_cmp(&b.1.mean))
            .map(|(name, _)| name.as_str())
    }
}

/// Run epsilon-greedy bandit learning against fixed per-action payoffs.
/// Each episode plays the greedy action (ties broken uniformly at random),
/// replaced by a uniformly random action with probability `epsilon`.
pub fn epsilon_explore_run(
    payoffs: &BTreeMap<String, f64>,
    episodes: u64,
    epsilon: f64,
    seed: u64,
) -> EpsilonExplorer {
    assert!(episodes >= 1, "need at least one episode");
    assert!((0.0..=1.0).contains(&epsilon));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let actions: Vec<&String> = payoffs.keys().collect();
    let mut stats: BTreeMap<String, ActionStats> = payoffs
        .keys()
        .map(|k| (k.clone(), ActionStats::default()))
        .collect();
    for _ in 0..episodes {
        let explore = rng.gen::<f64>() < epsilon;
        let chosen: &str = if explore {
            actions.choose(&mut rng).unwrap()
        } else {
            let best = stats
                .values()
                .map(|s| s.mean)
                .fold(f64::NEG_INFINITY, f64::max);
            let tied: Vec<&String> = payoffs
                .keys()
                .filter(|k| stats[*k].mean == best)
                .collect();
            tied.choose(&mut rng).unwrap()
        };
        let payoff = payoffs[chosen];
        stats.get_mut(chosen).unwrap().observe(payoff);
    }
    let never_sampled = stats
        .iter()
        .filter(|(_, s)| s.samples == 0)
        .map(|(k, _)| k.clone())
        .collect();
    EpsilonExplorer {
        epsilon,
        episodes,
        seed,
        stats,
        never_sampled,
    }
}

/// Security-guard scenario report. The interviewer reads the applicant's
/// policy: a steal sampled as an exploration deviation is shrugged off and
/// pays `gain`, while making stealing the policy costs `cost`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SecurityGuardReport {
    pub epsilon: f64,
    pub episodes: u64,
    pub gain: f64,
    pub cost: f64,
    /// Mean observed payoff of steal across exploration deviations; absent
    /// when steal was never sampled.
    pub exploration_value_of_steal: Option<f64>,
    /// On-policy value of making steal the deterministic policy.
    pub policy_value_of_steal: f64,
    pub steal_samples: u64,
}

pub const GUARD_GAIN: f64 = 10.0;
pub const GUARD_COST: f64 = 50.0;

/// Run the interview: the policy stays the honest default while epsilon
/// exploration occasionally steals. The on-policy value of stealing is
/// measured separately by forcing the policy to steal.
pub fn security_guard_sim(episodes: u64, epsilon: f64, seed: u64) -> SecurityGuardReport {
    security_guard_sim_with(episodes, epsilon, seed, GUARD_GAIN, GUARD_COST)
}

pub fn security_guard_sim_with(
    episodes: u64,
    epsilon: f64,
    seed: u64,
    gain: f64,
    cost: f64,
) -> SecurityGuardReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut steal_stats = ActionStats::default();
    for _ in 0..episodes {
        let explore = rng.gen::<f64>() < epsilon;
        let executed_steal = explore && rng.gen::<bool>();
        if executed_steal {
            // Deviation from the honest policy: the interviewer does not
            // hold it against the applicant.
            steal_stats.observe(gain);
        }
    }
    // On-policy probe: with steal as the declared policy, every steal is
    // policy-driven and the interviewer prices it accordingly.
    let mut policy_stats = ActionStats::default();
    for _ in 0..episodes.max(1) {
        policy_stats.observe(-cost);
    }
    SecurityGuardReport {
        epsilon,
        episodes,
        gain,
        cost,
        exploration_value_of_steal: (steal_stats.samples > 0).then_some(steal_stats.mean),
        policy_value_of_steal: policy_stats.mean,
        steal_samples: steal_stats.samples,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn five_ten_payoffs() -> BTreeMap<String, f64> {
        BTreeMap::from([("take5".to_string(), 5.0), ("take10".to_string(), 10.0)])
    }

    #[test]
    fn deterministic_payoffs_give_exact_estimates() {
        let run = epsilon_explore_run(&five_ten_payoffs(), 10_000, 0.1, 7);
        assert_eq!(run.estimate("take5"), Some(5.0));
        assert_eq!(run.estimate("take10"), Some(10.0));
        assert!(run.samples("take5") >= 30);
        assert!(run.samples("take10") >= 30);
        assert_eq!(run.greedy_action(), Some("take10"));
    }

    #[test]
    fn pure_exploration_samples_evenly() {
        let run = epsilon_explore_run(&five_ten_payoffs(), 10_000, 1.0, 11);
        let a = run.samples("take5") as f64;
        let b = run.samples("take10") as f64;
        let ratio = a / (a + b);
        assert!((ratio - 0.5).abs() < 0.03, "ratio {ratio}");
    }

    #[test]
    fn greedy_without_exploration_can_lock_on() {
        let mut locked = 0;
        for seed in 0..20 {
            let run = epsilon_explore_run(&five_ten_payoffs(), 1000, 0.0, seed);
            if !run.never_sampled.is_empty() {
                locked += 1;
                // Whatever was tried first won and kept winning.
                assert_eq!(run.never_sampled.len(), 1);
            }
        }
        assert_eq!(
            locked, 20,
            "with zero exploration every run must starve one action"
        );
    }

    #[test]
    fn estimates_are_exact_means_of_observations() {
        let payoffs = BTreeMap::from([("a".to_string(), 3.5), ("b".to_string(), -2.0)]);
        let run = epsilon_explore_run(&payoffs, 500, 0.5, 3);
        for action in ["a", "b"] {
            if run.samples(action) > 0 {
                assert_eq!(run.estimate(action), Some(payoffs[action]));
            }
        }
    }

    #[test]
    fn guard_estimates_diverge_from_policy_value() {
        let report = security_guard_sim(20_000, 0.05, 42);
        assert_eq!(report.exploration_value_of_steal, Some(10.0));
        assert_eq!(report.policy_value_of_steal, -50.0);
    }

    #[test]
    fn guard_without_exploration_reports_undefined() {
        let report = security_guard_sim(1000, 0.0, 42);
        assert_eq!(report.exploration_value_of_steal, None);
        assert_eq!(report.steal_samples, 0);
    }

    #[test]
    fn guard_degenerate_stakes_agree() {
        let report = security_guard_sim_with(5000, 0.1, 9, 0.0, 0.0);
        assert_eq!(report.exploration_value_of_steal, Some(0.0));
        assert_eq!(report.policy_value_of_steal, 0.0);
    }
}
