//! Finite decision problems whose environments may read the agent's whole
//! reaction map, modeling predictors and copies. All payoffs and chance
//! probabilities are exact rationals.

use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

/// A pure reaction map: one action index per observation index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PureReaction(pub Vec<usize>);

impl PureReaction {
    pub fn action(&self, obs: usize) -> usize {
        self.0[obs]
    }

    pub fn with_action(&self, obs: usize, action: usize) -> PureReaction {
        let mut v = self.0.clone();
        v[obs] = action;
        PureReaction(v)
    }
}

/// A policy: a total reaction map, pure or mixed. Mixed weights are exact
/// rationals summing to one per observation.
#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    Pure(PureReaction),
    Mixed(Vec<Vec<(usize, Rat)>>),
}

impl Policy {
    pub fn pure(reaction: &PureReaction) -> Policy {
        Policy::Pure(reaction.clone())
    }

    /// Probability that this policy takes `action` at `obs`.
    pub fn action_weight(&self, obs: usize, action: usize) -> Rat {
        match self {
            Policy::Pure(r) => {
                if r.action(obs) == action {
                    Rat::one()
                } else {
                    Rat::zero()
                }
            }
            Policy::Mixed(rows) => rows[obs]
                .iter()
                .find(|(a, _)| *a == action)
                .map(|(_, w)| w.clone())
                .unwrap_or_else(Rat::zero),
        }
    }

    pub fn as_pure(&self) -> Option<&PureReaction> {
        match self {
            Policy::Pure(r) => Some(r),
            Policy::Mixed(_) => None,
        }
    }

    /// Check the mixed-weight invariant.
    pub fn validate(&self, observations: usize, actions: usize) -> Result<(), PolicyError> {
        match self {
            Policy::Pure(r) => {
                if r.0.len() != observations {
                    return Err(PolicyError::WrongArity);
                }
                if r.0.iter().any(|&a| a >= actions) {
                    return Err(PolicyError::UnknownAction);
                }
            }
            Policy::Mixed(rows) => {
                if rows.len() != observations {
                    return Err(PolicyError::WrongArity);
                }
                for row in rows {
                    if row.iter().any(|(a, _)| *a >= actions) {
                        return Err(PolicyError::UnknownAction);
                    }
                    let total: Rat = row.iter().map(|(_, w)| w.clone()).sum();
                    if total != Rat::one() {
                        return Err(PolicyError::WeightsNotNormalized);
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolicyError {
    #[error("policy does not map every observation")]
    WrongArity,
    #[error("policy references an unknown action")]
    UnknownAction,
    #[error("mixed weights do not sum to one")]
    WeightsNotNormalized,
}

/// Observation produced by a chance outcome, given the policy the
/// environment has read. Must not depend on the actor's realized actions.
pub type ObserveFn = Arc<dyn Fn(&Policy, usize) -> usize + Send + Sync>;
/// Terminal payoff of a play: the environment reads the full policy (the
/// predictor view), the actor's realized reaction map, and the chance
/// outcome.
pub type PayoffFn = Arc<dyn Fn(&Policy, &PureReaction, usize) -> Rat + Send + Sync>;

#[derive(Clone)]
pub struct DecisionProblem {
    pub name: String,
    pub observations: Vec<String>,
    pub actions: Vec<String>,
    /// Chance outcomes with exact probabilities summing to one.
    pub outcomes: Vec<(String, Rat)>,
    pub observe: ObserveFn,
    pub payoff: PayoffFn,
}

impl fmt::Debug for DecisionProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DecisionProblem")
            .field("name", &self.name)
            .field("observations", &self.observations)
            .field("actions", &self.actions)
            .field("outcomes", &self.outcomes)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProblemError {
    #[error("chance probabilities sum to {0}, not 1")]
    BadChance(String),
    #[error("policy enumeration would produce {count} policies, over the cap {cap}")]
    EnumerationCap { count: String, cap: usize },
}

pub const ENUMERATION_CAP: usize = 1_000_000;

impl DecisionProblem {
    pub fn new(
        name: impl Into<String>,
        observations: Vec<String>,
        actions: Vec<String>,
        outcomes: Vec<(String, Rat)>,
        observe: ObserveFn,
        payoff: PayoffFn,
    ) -> Result<DecisionProblem, ProblemError> {
        let total: Rat = outcomes.iter().map(|(_, p)| p.clone()).sum();
        if total != Rat::one() {
            return Err(ProblemError::BadChance(total.to_string()));
        }
        Ok(DecisionProblem {
            name: name.into(),
            observations,
            actions,
            outcomes,
            observe,
            payoff,
        })
    }

    pub fn policy_name(&self, reaction: &PureReaction) -> String {
        self.observations
            .iter()
            .zip(&reaction.0)
            .map(|(o, &a)| format!("{o}={}", self.actions[a]))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// All pure policies in lexicographic order (first observation varies
/// slowest, action indices ascending).
pub fn enumerate_policies(problem: &DecisionProblem) -> Result<Vec<PureReaction>, ProblemError> {
    let n_obs = problem.observations.len();
    let n_act = problem.actions.len();
    let count = (n_act as u128).checked_pow(n_obs as u32);
    match count {
        Some(c) if c <= ENUMERATION_CAP as u128 => {}
        other => {
            return Err(ProblemError::EnumerationCap {
                count: other.map_or_else(|| "overflow".into(), |c| c.to_string()),
                cap: ENUMERATION_CAP,
            })
        }
    }
    let mut out = Vec::new();
    let mut current = vec![0usize; n_obs];
    loop {
        out.push(PureReaction(current.clone()));
        let mut i = n_obs;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            current[i] += 1;
            if current[i] < n_act {
                break;
            }
            current[i] = 0;
        }
    }
}

/// Ex-ante expected payoff of committing to `reaction` before observing
/// anything: the chance-weighted payoff with the environment reading the
/// very policy being evaluated.
pub fn evaluate_updateless(problem: &DecisionProblem, reaction: &PureReaction) -> Rat {
    let policy = Policy::pure(reaction);
    problem
        .outcomes
        .iter()
        .enumerate()
        .map(|(i, (_, p))| p.clone() * (problem.payoff)(&policy, reaction, i))
        .sum()
}

/// All pure policies maximizing the ex-ante expected payoff.
pub fn optimize_updateless(
    problem: &DecisionProblem,
) -> Result<Vec<PureReaction>, ProblemError> {
    let policies = enumerate_policies(problem)?;
    let mut best: Option<Rat> = None;
    let mut winners = Vec::new();
    for reaction in policies {
        let v = evaluate_updateless(problem, &reaction);
        match &best {
            None => {
                best = Some(v);
                winners = vec![reaction];
            }
            Some(b) if v > *b => {
                best = Some(v);
                winners = vec![reaction];
            }
            Some(b) if v == *b => winners.push(reaction),
            _ => {}
        }
    }
    Ok(winners)
}

/// Outcome of per-observation greedy optimization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UpdatefulOutcome {
    /// Best-response iteration reached a fixed point.
    Converged {
        policy: PureReaction,
        iterations: usize,
    },
    /// The iteration revisited a policy without converging; the cycle is
    /// reported rather than resolved.
    Cycle { states: Vec<PureReaction> },
}

pub const UPDATEFUL_ITERATION_CAP: usize = 100;

/// Per-observation greedy optimization: for each observation independently,
/// pick the action maximizing conditional expected payoff while the
/// environment's policy-reading features stay frozen at the current
/// candidate. Iterates from the lexicographically first policy; ties keep
/// the incumbent action, so only strict improvements move the policy.
pub fn optimize_updateful(problem: &DecisionProblem) -> UpdatefulOutcome {
    let n_obs = problem.observations.len();
    let n_act = problem.actions.len();
    let mut current = PureReaction(vec![0; n_obs]);
    let mut visited = vec![current.clone()];
    for iteration in 0..UPDATEFUL_ITERATION_CAP {
        let frozen = Policy::pure(&current);
        let mut next = current.clone();
        for obs in 0..n_obs {
            // Conditional (unnormalized) value of taking `action` at `obs`,
            // holding the predictor view frozen.
            let mut reachable = false;
            let value_of = |action: usize, reachable: &mut bool| -> Rat {
                let candidate = current.with_action(obs, action);
                let mut value = Rat::zero();
                for (i, (_, p)) in problem.outcomes.iter().enumerate() {
                    if (problem.observe)(&frozen, i) != obs {
                        continue;
                    }
                    *reachable = true;
                    value += p.clone() * (problem.payoff)(&frozen, &candidate, i);
                }
                value
            };
            let incumbent = current.action(obs);
            let mut best = (value_of(incumbent, &mut reachable), incumbent);
            for action in 0..n_act {
                if action == incumbent {
                    continue;
                }
                let value = value_of(action, &mut reachable);
                if value > best.0 {
                    best = (value, action);
                }
            }
            if reachable {
                next.0[obs] = best.1;
            }
        }
        if next == current {
            return UpdatefulOutcome::Converged {
                policy: current,
                iterations: iteration,
            };
        }
        if let Some(pos) = visited.iter().position(|p| *p == next) {
            return UpdatefulOutcome::Cycle {
                states: visited[pos..].to_vec(),
            };
        }
        visited.push(next.clone());
        current = next;
    }
    UpdatefulOutcome::Cycle { states: visited }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trivial_problem(n_obs: usize, n_act: usize) -> DecisionProblem {
        DecisionProblem::new(
            "trivial",
            (0..n_obs).map(|i| format!("o{i}")).collect(),
            (0..n_act).map(|i| format!("a{i}")).collect(),
            vec![("only".into(), Rat::one())],
            Arc::new(|_, _| 0),
            Arc::new(|_, actor: &PureReaction, _| rat(actor.action(0) as i64, 1)),
        )
        .unwrap()
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_policies(&trivial_problem(2, 2)).unwrap().len(), 4);
        assert_eq!(enumerate_policies(&trivial_problem(1, 3)).unwrap().len(), 3);
    }

    #[test]
    fn enumeration_is_lexicographic() {
        let all = enumerate_policies(&trivial_problem(2, 2)).unwrap();
        let order: Vec<Vec<usize>> = all.into_iter().map(|r| r.0).collect();
        assert_eq!(order, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let p = trivial_problem(30, 4);
        assert!(matches!(
            enumerate_policies(&p),
            Err(ProblemError::EnumerationCap { .. })
        ));
    }

    #[test]
    fn chance_must_sum_to_one() {
        let bad = DecisionProblem::new(
            "bad",
            vec!["o".into()],
            vec!["a".into()],
            vec![("h".into(), rat(1, 3)), ("t".into(), rat(1, 3))],
            Arc::new(|_, _| 0),
            Arc::new(|_, _, _| Rat::zero()),
        );
        assert!(matches!(bad, Err(ProblemError::BadChance(_))));
    }

    #[test]
    fn updateful_agrees_with_updateless_when_policy_ignored() {
        // Single observation, no predictor reading: both optimizers pick
        // the payoff-maximal action.
        let p = trivial_problem(1, 3);
        let ul = optimize_updateless(&p).unwrap();
        assert_eq!(ul, vec![PureReaction(vec![2])]);
        match optimize_updateful(&p) {
            UpdatefulOutcome::Converged { policy, .. } => {
                assert_eq!(policy, PureReaction(vec![2]))
            }
            other => panic!("expected convergence, got {other:?}"),
        }
    }

    #[test]
    fn mixed_policy_weights_validated() {
        let ok = Policy::Mixed(vec![vec![(0, rat(1, 2)), (1, rat(1, 2))]]);
        assert!(ok.validate(1, 2).is_ok());
        let bad = Policy::Mixed(vec![vec![(0, rat(1, 2)), (1, rat(1, 3))]]);
        assert_eq!(
            bad.validate(1, 2),
            Err(PolicyError::WeightsNotNormalized)
        );
    }
}
