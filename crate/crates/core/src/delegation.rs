//! Corrupted-reward delegation. A small MDP carries a true reward and an
//! observed feedback channel that disagrees on a set of corrupt states. In
//! standard feedback, a state reports on itself, so a self-aggrandizing
//! corrupt state teaches the learner to stay there. In decoupled feedback,
//! states report on *other* states, and every reporter is uncorrupted, so
//! the learner recovers the true values.
//!
//! The learner is tabular one-step temporal-difference on action values
//! with an epsilon-greedy behavior policy; the learning rate is 0.1
//! decaying with the visit count. A separate value-iteration oracle
//! computes exact values for either reward channel.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::num::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeedbackMode {
    /// Feedback about a state arrives while at that state and reflects the
    /// (possibly corrupt) observed channel.
    Standard,
    /// Feedback about a state arrives from designated other, uncorrupted
    /// states and reflects the true reward.
    Decoupled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RewardChannel {
    True,
    Observed,
}

#[derive(Debug, Clone)]
pub struct CorruptMdp<T: Real> {
    pub name: String,
    pub states: Vec<String>,
    pub actions: Vec<String>,
    /// `transitions[s][a]` = (probability, next state); rows sum to 1.
    pub transitions: Vec<Vec<Vec<(T, usize)>>>,
    /// True reward received on entering a state.
    pub true_reward: Vec<T>,
    /// Observed reward overrides on the corruption set.
    pub corrupt: BTreeMap<usize, T>,
    /// Decoupled schedule: (queried state, reporting state). Every reporter
    /// must lie outside the corruption set.
    pub feedback_schedule: Vec<(usize, usize)>,
    pub start: usize,
    pub discount: T,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MdpError {
    #[error("state count {0} exceeds the 12-state cap")]
    TooManyStates(usize),
    #[error("transition row for state {state} action {action} does not sum to 1")]
    BadTransition { state: usize, action: usize },
    #[error("decoupled reporter {reporter} is itself corrupt")]
    CorruptReporter { reporter: usize },
}

pub const STATE_CAP: usize = 12;

impl<T: Real> CorruptMdp<T> {
    pub fn validate(&self) -> Result<(), MdpError> {
        if self.states.len() > STATE_CAP {
            return Err(MdpError::TooManyStates(self.states.len()));
        }
        let tol = T::from_f64_lossy(1e-12);
        for (s, row) in self.transitions.iter().enumerate() {
            for (a, dist) in row.iter().enumerate() {
                let total = dist.iter().fold(T::zero(), |acc, (p, _)| acc + *p);
                if (total - T::one()).abs() > tol {
                    return Err(MdpError::BadTransition { state: s, action: a });
                }
            }
        }
        for &(_, reporter) in &self.feedback_schedule {
            if self.corrupt.contains_key(&reporter) {
                return Err(MdpError::CorruptReporter { reporter });
            }
        }
        Ok(())
    }

    pub fn observed_reward(&self, state: usize) -> T {
        self.corrupt
            .get(&state)
            .copied()
            .unwrap_or(self.true_reward[state])
    }

    pub fn reward(&self, channel: RewardChannel, state: usize) -> T {
        match channel {
            RewardChannel::True => self.true_reward[state],
            RewardChannel::Observed => self.observed_reward(state),
        }
    }
}

// ---------------------------------------------------------------------------
// Exact value iteration oracle.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ExactValues<T> {
    pub values: Vec<T>,
    pub greedy: Vec<usize>,
    /// Max-norm residual after each sweep; contraction makes it decrease.
    pub residuals: Vec<T>,
}

pub const VALUE_ITERATION_TOLERANCE: f64 = 1e-10;

/// Optimal state values under the chosen reward channel, by value iteration
/// to a fixed point with max-norm residual below 1e-10.
pub fn exact_values<T: Real>(mdp: &CorruptMdp<T>, channel: RewardChannel) -> ExactValues<T> {
    let n = mdp.states.len();
    let tol = T::from_f64_lossy(VALUE_ITERATION_TOLERANCE);
    let mut values = vec![T::zero(); n];
    let mut residuals = Vec::new();
    loop {
        let mut next = vec![T::zero(); n];
        for s in 0..n {
            let mut best = T::neg_infinity();
            for dist in &mdp.transitions[s] {
                let q = dist.iter().fold(T::zero(), |acc, &(p, s2)| {
                    acc + p * (mdp.reward(channel, s2) + mdp.discount * values[s2])
                });
                best = best.max(q);
            }
            next[s] = best;
        }
        let residual = values
            .iter()
            .zip(&next)
            .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).abs()));
        residuals.push(residual);
        values = next;
        if residual < tol {
            break;
        }
    }
    let greedy = greedy_from_values(mdp, channel, &values);
    ExactValues {
        values,
        greedy,
        residuals,
    }
}

fn greedy_from_values<T: Real>(
    mdp: &CorruptMdp<T>,
    channel: RewardChannel,
    values: &[T],
) -> Vec<usize> {
    (0..mdp.states.len())
        .map(|s| {
            let mut best = (T::neg_infinity(), 0usize);
            for (a, dist) in mdp.transitions[s].iter().enumerate() {
                let q = dist.iter().fold(T::zero(), |acc, &(p, s2)| {
                    acc + p * (mdp.reward(channel, s2) + mdp.discount * values[s2])
                });
                if q > best.0 {
                    best = (q, a);
                }
            }
            best.1
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Tabular TD learner.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LearnParams {
    pub base_learning_rate: f64,
    /// Visit count at which the per-pair learning rate has halved; the
    /// schedule is base / (1 + (n-1)/halving), harmonic in the visit count.
    pub decay_halving: f64,
    pub epsilon: f64,
    pub episode_length: usize,
}

impl Default for LearnParams {
    fn default() -> Self {
        LearnParams {
            base_learning_rate: 0.1,
            decay_halving: 1000.0,
            epsilon: 0.1,
            episode_length: 40,
        }
    }
}

impl LearnParams {
    fn rate(&self, visit: u64) -> f64 {
        self.base_learning_rate / (1.0 + (visit.saturating_sub(1)) as f64 / self.decay_halving)
    }
}

#[derive(Debug, Clone)]
pub struct TrainResult<T> {
    pub mode: FeedbackMode,
    /// Learned state values: max over the learned action values.
    pub values: Vec<T>,
    pub greedy: Vec<usize>,
    /// Reward estimates gathered from the feedback channel; absent until
    /// the first feedback about the state arrives.
    pub reward_estimates: Vec<Option<T>>,
    pub state_visits: Vec<u64>,
}

/// Run tabular TD on the observed feedback. The learner knows the
/// transition table; rewards it must learn from the feedback channel.
pub fn train<T: Real>(
    mdp: &CorruptMdp<T>,
    mode: FeedbackMode,
    episodes: u64,
    params: &LearnParams,
    seed: u64,
) -> TrainResult<T> {
    let n = mdp.states.len();
    let n_act = mdp.actions.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = vec![vec![T::zero(); n_act]; n];
    let mut visits = vec![vec![0u64; n_act]; n];
    let mut state_visits = vec![0u64; n];
    let mut reward_estimate: Vec<Option<T>> = vec![None; n];

    let deliver_feedback = |state: usize, est: &mut Vec<Option<T>>| match mode {
        FeedbackMode::Standard => {
            est[state] = Some(mdp.observed_reward(state));
        }
        FeedbackMode::Decoupled => {
            for &(query, reporter) in &mdp.feedback_schedule {
                if reporter == state {
                    est[query] = Some(mdp.true_reward[query]);
                }
            }
        }
    };

    for _ in 0..episodes {
        let mut state = mdp.start;
        state_visits[state] += 1;
        deliver_feedback(state, &mut reward_estimate);
        for _ in 0..params.episode_length {
            let action = if rng.gen::<f64>() < params.epsilon {
                rng.gen_range(0..n_act)
            } else {
                let mut best = (T::neg_infinity(), 0usize);
                for (a, qa) in q[state].iter().enumerate() {
                    if *qa > best.0 {
                        best = (*qa, a);
                    }
                }
                best.1
            };
            // Sample the transition.
            let draw = T::from_f64_lossy(rng.gen::<f64>());
            let mut acc = T::zero();
            let mut next = mdp.transitions[state][action]
                .last()
                .map(|&(_, s2)| s2)
                .expect("transition rows are nonempty");
            for &(p, s2) in &mdp.transitions[state][action] {
                acc += p;
                if draw < acc {
                    next = s2;
                    break;
                }
            }
            state_visits[next] += 1;
            deliver_feedback(next, &mut reward_estimate);
            let reward = reward_estimate[next].unwrap_or_else(T::zero);
            visits[state][action] += 1;
            let alpha = T::from_f64_lossy(params.rate(visits[state][action]));
            let bootstrap = q[next]
                .iter()
                .fold(T::neg_infinity(), |acc, v| acc.max(*v));
            let target = reward + mdp.discount * bootstrap;
            q[state][action] = q[state][action] + alpha * (target - q[state][action]);
            state = next;
        }
    }
    let values: Vec<T> = q
        .iter()
        .map(|row| row.iter().fold(T::neg_infinity(), |a, v| a.max(*v)))
        .collect();
    let greedy = q
        .iter()
        .map(|row| {
            let mut best = (T::neg_infinity(), 0usize);
            for (a, v) in row.iter().enumerate() {
                if *v > best.0 {
                    best = (*v, a);
                }
            }
            best.1
        })
        .collect();
    TrainResult {
        mode,
        values,
        greedy,
        reward_estimates: reward_estimate,
        state_visits,
    }
}

/// Which state the greedy policy settles into: follow it from the start
/// state and return the most-visited state over a long rollout (expected
/// transitions, deterministic fixtures settle immediately).
pub fn greedy_occupancy<T: Real>(mdp: &CorruptMdp<T>, greedy: &[usize], steps: usize) -> usize {
    let mut state = mdp.start;
    let mut counts = vec![0usize; mdp.states.len()];
    for _ in 0..steps {
        // Deterministic fixtures have single-support rows; general rollouts
        // follow the highest-probability branch.
        let dist = &mdp.transitions[state][greedy[state]];
        let next = dist
            .iter()
            .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
            .map(|&(_, s2)| s2)
            .unwrap();
        counts[next] += 1;
        state = next;
    }
    counts
        .iter()
        .enumerate()
        .max_by_key(|(_, &c)| c)
        .map(|(s, _)| s)
        .unwrap()
}

// ---------------------------------------------------------------------------
// Fixtures.
// ---------------------------------------------------------------------------

pub const WIREHEAD_STATES: [&str; 3] = ["hub", "corrupt", "honest"];

/// The wirehead fixture: a hub with a corrupt room on one side and an
/// honest room on the other. The corrupt state reports +10 about itself
/// while its true reward is 0; the honest state is worth +1. Leaving a room
/// passes back through the hub, so the exact state values are distinct and
/// the learned tables have something nontrivial to match. Decoupled
/// feedback routes every report through uncorrupted states.
pub fn wirehead_fixture<T: Real>() -> CorruptMdp<T> {
    let r = |v: f64| T::from_f64_lossy(v);
    let go = |target: usize| vec![(T::one(), target)];
    let mdp = CorruptMdp {
        name: "wirehead".into(),
        states: WIREHEAD_STATES.iter().map(|s| s.to_string()).collect(),
        actions: vec!["leave".into(), "stay".into()],
        transitions: vec![
            // hub: "leave" enters the corrupt room, "stay" enters the honest room
            vec![go(1), go(2)],
            // corrupt room: leave to hub, or stay
            vec![go(0), go(1)],
            // honest room: leave to hub, or stay
            vec![go(0), go(2)],
        ],
        true_reward: vec![r(0.0), r(0.0), r(1.0)],
        corrupt: BTreeMap::from([(1usize, r(10.0))]),
        // Reports: hub describes corrupt and honest; honest describes hub.
        feedback_schedule: vec![(1, 0), (2, 0), (0, 2)],
        start: 0,
        discount: r(0.9),
    };
    mdp.validate().expect("fixture is well-formed");
    mdp
}

/// Same dynamics with an empty corruption set.
pub fn uncorrupted_fixture<T: Real>() -> CorruptMdp<T> {
    let mut mdp = wirehead_fixture::<T>();
    mdp.name = "uncorrupted".into();
    mdp.corrupt.clear();
    mdp
}

// ---------------------------------------------------------------------------
// Wirehead contrast: planning against the feedback channel vs. planning
// against a fixed utility model of outcomes.
// ---------------------------------------------------------------------------

/// Deterministic planning world: working earns true utility; pressing the
/// button inflates every subsequent observed reward without changing what
/// the work is worth.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ButtonWorld {
    /// Observed bonus per step while the button is pressed.
    pub button_bonus: f64,
    pub work_value: f64,
}

impl Default for ButtonWorld {
    fn default() -> Self {
        ButtonWorld {
            button_bonus: 5.0,
            work_value: 1.0,
        }
    }
}

pub const BUTTON_ACTIONS: [&str; 3] = ["idle", "press_button", "work"];

impl ButtonWorld {
    /// (true utility, observed reward) of taking `action` when the button
    /// state is `pressed`; returns the new button state too.
    pub fn step(&self, pressed: bool, action: usize) -> (f64, f64, bool) {
        let (true_u, base_obs, next_pressed) = match action {
            0 => (0.0, 0.0, pressed),
            1 => (0.0, 0.0, true),
            2 => (self.work_value, self.work_value, pressed),
            _ => unreachable!(),
        };
        let bonus = if next_pressed { self.button_bonus } else { 0.0 };
        (true_u, base_obs + bonus, next_pressed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlannerKind {
    /// Maximizes the sum of the observed feedback channel.
    RewardMaximizer,
    /// Maximizes a fixed internal utility model of outcomes.
    ObservationUtility,
    /// Ablation: an observation-utility planner whose utility model has
    /// been replaced by the observed channel itself.
    CorruptedUtilityModel,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Plan {
    pub actions: Vec<String>,
    pub total_true_utility: f64,
    pub total_observed_reward: f64,
    pub presses_button: bool,
}

/// Exhaustive search over all action sequences of the given horizon; ties
/// resolved toward the lexicographically first action sequence.
pub fn plan_exhaustive(world: &ButtonWorld, planner: PlannerKind, horizon: usize) -> Plan {
    assert!(horizon <= 10, "horizon cap exceeded");
    let n_act = BUTTON_ACTIONS.len();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut plan = vec![0usize; horizon];
    loop {
        let mut pressed = false;
        let mut true_total = 0.0;
        let mut obs_total = 0.0;
        for &a in &plan {
            let (u, o, p) = world.step(pressed, a);
            true_total += u;
            obs_total += o;
            pressed = p;
        }
        let objective = match planner {
            PlannerKind::RewardMaximizer => obs_total,
            PlannerKind::ObservationUtility => true_total,
            PlannerKind::CorruptedUtilityModel => obs_total,
        };
        if best.as_ref().is_none_or(|(b, _)| objective > *b) {
            best = Some((objective, plan.clone()));
        }
        // lexicographic odometer
        let mut i = horizon;
        loop {
            if i == 0 {
                let (_, actions) = best.unwrap();
                return finish_plan(world, &actions);
            }
            i -= 1;
            plan[i] += 1;
            if plan[i] < n_act {
                break;
            }
            plan[i] = 0;
        }
    }
}

fn finish_plan(world: &ButtonWorld, actions: &[usize]) -> Plan {
    let mut pressed = false;
    let mut true_total = 0.0;
    let mut obs_total = 0.0;
    for &a in actions {
        let (u, o, p) = world.step(pressed, a);
        true_total += u;
        obs_total += o;
        pressed = p;
    }
    Plan {
        actions: actions
            .iter()
            .map(|&a| BUTTON_ACTIONS[a].to_string())
            .collect(),
        total_true_utility: true_total,
        total_observed_reward: obs_total,
        presses_button: actions.contains(&1),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireheadContrast {
    pub reward_maximizer: Plan,
    pub observation_utility: Plan,
}

pub fn wirehead_contrast(world: &ButtonWorld, horizon: usize) -> WireheadContrast {
    WireheadContrast {
        reward_maximizer: plan_exhaustive(world, PlannerKind::RewardMaximizer, horizon),
        observation_utility: plan_exhaustive(world, PlannerKind::ObservationUtility, horizon),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absorbing_state_value_is_geometric_series() {
        let mdp: CorruptMdp<f64> = CorruptMdp {
            name: "absorbing".into(),
            states: vec!["only".into()],
            actions: vec!["stay".into()],
            transitions: vec![vec![vec![(1.0, 0)]]],
            true_reward: vec![1.0],
            corrupt: BTreeMap::new(),
            feedback_schedule: vec![],
            start: 0,
            discount: 0.9,
        };
        mdp.validate().unwrap();
        let exact = exact_values(&mdp, RewardChannel::True);
        assert!((exact.values[0] - 10.0).abs() < 1e-8);
    }

    #[test]
    fn residuals_decrease_monotonically() {
        let mdp = wirehead_fixture::<f64>();
        for channel in [RewardChannel::True, RewardChannel::Observed] {
            let exact = exact_values(&mdp, channel);
            for pair in exact.residuals.windows(2) {
                assert!(pair[1] <= pair[0] + 1e-15, "residual rose: {pair:?}");
            }
        }
    }

    #[test]
    fn oracle_prefers_corrupt_state_on_observed_channel_only() {
        let mdp = wirehead_fixture::<f64>();
        let observed = exact_values(&mdp, RewardChannel::Observed);
        // From the hub, the observed-optimal move enters the corrupt room.
        assert_eq!(observed.greedy[0], 0);
        assert!((observed.values[1] - 100.0).abs() < 1e-6);
        let true_channel = exact_values(&mdp, RewardChannel::True);
        assert_eq!(true_channel.greedy[0], 1);
        assert!((true_channel.values[1] - 9.0).abs() < 1e-6);
        assert!((true_channel.values[2] - 10.0).abs() < 1e-6);
    }

    #[test]
    fn standard_mode_wireheads() {
        let mdp = wirehead_fixture::<f64>();
        let result = train(&mdp, FeedbackMode::Standard, 5000, &LearnParams::default(), 1);
        assert_eq!(greedy_occupancy(&mdp, &result.greedy, 50), 1);
        let oracle = exact_values(&mdp, RewardChannel::Observed);
        let err = (result.values[1] - oracle.values[1]).abs();
        assert!(err <= 0.1, "corrupt-state value error {err}");
    }

    #[test]
    fn decoupled_mode_recovers_true_values_across_seeds() {
        let mdp = wirehead_fixture::<f64>();
        let oracle = exact_values(&mdp, RewardChannel::True);
        for seed in [1, 2, 3, 4, 5] {
            let result = train(
                &mdp,
                FeedbackMode::Decoupled,
                5000,
                &LearnParams::default(),
                seed,
            );
            assert_eq!(
                greedy_occupancy(&mdp, &result.greedy, 50),
                2,
                "seed {seed} should settle on the honest state"
            );
            let max_err = result
                .values
                .iter()
                .zip(&oracle.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(max_err <= 0.1, "seed {seed}: max-norm error {max_err}");
        }
    }

    #[test]
    fn empty_corruption_set_modes_agree_with_oracle() {
        let mdp = uncorrupted_fixture::<f64>();
        let oracle = exact_values(&mdp, RewardChannel::True);
        for mode in [FeedbackMode::Standard, FeedbackMode::Decoupled] {
            let result = train(&mdp, mode, 5000, &LearnParams::default(), 3);
            let max_err = result
                .values
                .iter()
                .zip(&oracle.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(max_err <= 0.1, "{mode:?}: max-norm error {max_err}");
        }
    }

    #[test]
    fn reporter_must_be_uncorrupted() {
        let mut mdp = wirehead_fixture::<f64>();
        mdp.feedback_schedule.push((0, 1));
        assert_eq!(
            mdp.validate(),
            Err(MdpError::CorruptReporter { reporter: 1 })
        );
    }

    #[test]
    fn reward_planner_presses_the_button_utility_planner_does_not() {
        let world = ButtonWorld::default();
        let contrast = wirehead_contrast(&world, 6);
        assert!(contrast.reward_maximizer.presses_button);
        assert!(!contrast.observation_utility.presses_button);
        assert!(
            contrast.observation_utility.total_true_utility
                > contrast.reward_maximizer.total_true_utility
        );
    }

    #[test]
    fn removing_the_button_effect_aligns_the_planners() {
        let world = ButtonWorld {
            button_bonus: 0.0,
            ..Default::default()
        };
        let contrast = wirehead_contrast(&world, 6);
        assert_eq!(
            contrast.reward_maximizer.actions,
            contrast.observation_utility.actions
        );
        assert!(!contrast.reward_maximizer.presses_button);
    }

    #[test]
    fn corrupting_the_utility_model_relocates_the_problem() {
        let world = ButtonWorld::default();
        let corrupted = plan_exhaustive(&world, PlannerKind::CorruptedUtilityModel, 6);
        assert!(corrupted.presses_button);
    }

    #[test]
    fn single_precision_training_matches_behavior() {
        let mdp = wirehead_fixture::<f32>();
        let result = train(&mdp, FeedbackMode::Standard, 3000, &LearnParams::default(), 1);
        assert_eq!(greedy_occupancy(&mdp, &result.greedy, 50), 1);
    }
}
