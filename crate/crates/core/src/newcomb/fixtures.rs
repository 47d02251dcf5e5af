//! Named decision-problem fixtures: predictor games and linked-copy games.
//! Payoff constants are conventional fixture values.

use std::sync::Arc;

use num_traits::{One, Zero};

use super::problem::{
    optimize_updateful, optimize_updateless, rat, DecisionProblem, Policy, ProblemError,
    PureReaction, Rat, UpdatefulOutcome,
};
use crate::newcomb::problem::evaluate_updateless;

pub const NEWCOMB_BIG_BOX: i64 = 1_000_000;
pub const NEWCOMB_SMALL_BOX: i64 = 1_000;

pub const ACT_ONE_BOX: usize = 0;
pub const ACT_TWO_BOX: usize = 1;

/// A predictor fills the opaque box with the big prize exactly when it
/// predicts one-boxing; the prediction matches the agent's actual policy
/// with the given accuracy.
pub fn newcomb(accuracy: Rat) -> DecisionProblem {
    assert!(accuracy >= Rat::zero() && accuracy <= Rat::one());
    let wrong = Rat::one() - accuracy.clone();
    DecisionProblem::new(
        "newcomb",
        vec!["start".into()],
        vec!["one_box".into(), "two_box".into()],
        vec![("correct".into(), accuracy), ("incorrect".into(), wrong)],
        Arc::new(|_, _| 0),
        Arc::new(|policy: &Policy, actor: &PureReaction, outcome| {
            let viewed = policy
                .as_pure()
                .expect("newcomb predictor reads pure policies")
                .action(0);
            let predicted = if outcome == 0 { viewed } else { 1 - viewed };
            let big_in_box = predicted == ACT_ONE_BOX;
            let mut payoff = Rat::zero();
            if big_in_box {
                payoff += rat(NEWCOMB_BIG_BOX, 1);
            }
            if actor.action(0) == ACT_TWO_BOX {
                payoff += rat(NEWCOMB_SMALL_BOX, 1);
            }
            payoff
        }),
    )
    .expect("newcomb chance table is exact")
}

pub const ACT_COOPERATE: usize = 0;
pub const ACT_DEFECT: usize = 1;

/// Prisoner's dilemma against an exact copy: the opponent runs the same
/// policy the environment reads. Payoffs (mine): CC=3, DD=1, C-vs-D=0,
/// D-vs-C=5.
pub fn twin_prisoners_dilemma() -> DecisionProblem {
    DecisionProblem::new(
        "twin_pd",
        vec!["start".into()],
        vec!["cooperate".into(), "defect".into()],
        vec![("play".into(), Rat::one())],
        Arc::new(|_, _| 0),
        Arc::new(|policy: &Policy, actor: &PureReaction, _| {
            let opponent = policy
                .as_pure()
                .expect("twin runs pure policies")
                .action(0);
            let me = actor.action(0);
            match (me, opponent) {
                (ACT_COOPERATE, ACT_COOPERATE) => rat(3, 1),
                (ACT_DEFECT, ACT_DEFECT) => rat(1, 1),
                (ACT_COOPERATE, ACT_DEFECT) => rat(0, 1),
                (ACT_DEFECT, ACT_COOPERATE) => rat(5, 1),
                _ => unreachable!(),
            }
        }),
    )
    .expect("twin chance table is exact")
}

pub const OBS_ASKED: usize = 0;
pub const OBS_PAID_OUT: usize = 1;
pub const ACT_PAY: usize = 0;
pub const ACT_REFUSE: usize = 1;

/// A fair coin decides between an asking branch, where paying costs
/// `stake_pay`, and a payout branch, where the agent receives `stake_win`
/// exactly when the predictor sees that its policy pays when asked.
pub fn counterfactual_mugging_problem(stake_win: Rat, stake_pay: Rat) -> DecisionProblem {
    assert!(stake_win >= Rat::zero() && stake_pay >= Rat::zero());
    DecisionProblem::new(
        "counterfactual_mugging",
        vec!["asked".into(), "paid_out".into()],
        vec!["pay".into(), "refuse".into()],
        vec![("heads".into(), rat(1, 2)), ("tails".into(), rat(1, 2))],
        Arc::new(|_, outcome| if outcome == 0 { OBS_PAID_OUT } else { OBS_ASKED }),
        Arc::new(move |policy: &Policy, actor: &PureReaction, outcome| {
            if outcome == 0 {
                // Heads: payout if the policy would pay when asked.
                let would_pay = policy
                    .as_pure()
                    .expect("mugging predictor reads pure policies")
                    .action(OBS_ASKED)
                    == ACT_PAY;
                if would_pay {
                    stake_win.clone()
                } else {
                    Rat::zero()
                }
            } else {
                // Tails: the ask actually happens.
                if actor.action(OBS_ASKED) == ACT_PAY {
                    -stake_pay.clone()
                } else {
                    Rat::zero()
                }
            }
        }),
    )
    .expect("mugging chance table is exact")
}

/// Side-by-side comparison of the two optimizers on the mugging problem.
#[derive(Debug, Clone)]
pub struct MuggingReport {
    pub stake_win: Rat,
    pub stake_pay: Rat,
    /// Ex-ante optimal policies (ties kept).
    pub updateless_policies: Vec<PureReaction>,
    pub updateless_value: Rat,
    pub updateless_pays: bool,
    /// True when paying and refusing tie ex ante.
    pub tie: bool,
    pub updateful: UpdatefulOutcome,
    pub updateful_pays: bool,
    pub updateful_value: Rat,
}

pub fn counterfactual_mugging(
    stake_win: Rat,
    stake_pay: Rat,
) -> Result<MuggingReport, ProblemError> {
    let problem = counterfactual_mugging_problem(stake_win.clone(), stake_pay.clone());
    let winners = optimize_updateless(&problem)?;
    let updateless_value = evaluate_updateless(&problem, &winners[0]);
    let pays = winners
        .iter()
        .any(|r| r.action(OBS_ASKED) == ACT_PAY);
    let refuses = winners
        .iter()
        .any(|r| r.action(OBS_ASKED) == ACT_REFUSE);
    let updateful = optimize_updateful(&problem);
    let (updateful_pays, updateful_value) = match &updateful {
        UpdatefulOutcome::Converged { policy, .. } => (
            policy.action(OBS_ASKED) == ACT_PAY,
            evaluate_updateless(&problem, policy),
        ),
        UpdatefulOutcome::Cycle { .. } => (false, Rat::zero()),
    };
    Ok(MuggingReport {
        stake_win,
        stake_pay,
        updateless_policies: winners,
        updateless_value,
        updateless_pays: pays,
        tie: pays && refuses,
        updateful,
        updateful_pays,
        updateful_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newcomb::problem::enumerate_policies;

    fn one_boxes(problem: &DecisionProblem) -> bool {
        let best = optimize_updateless(problem).unwrap();
        best.iter().all(|r| r.action(0) == ACT_ONE_BOX) && best.len() == 1
    }

    #[test]
    fn newcomb_threshold_is_1001_over_2000() {
        // Exactly at the threshold both actions tie.
        let at = newcomb(rat(1001, 2000));
        assert_eq!(optimize_updateless(&at).unwrap().len(), 2);
        assert!(one_boxes(&newcomb(rat(1001, 2000) + rat(1, 1_000_000))));
        assert!(!one_boxes(&newcomb(rat(1001, 2000) - rat(1, 1_000_000))));
        assert!(one_boxes(&newcomb(rat(99, 100))));
        assert!(!one_boxes(&newcomb(rat(2, 5))));
    }

    #[test]
    fn newcomb_updateful_two_boxes() {
        let p = newcomb(rat(99, 100));
        match optimize_updateful(&p) {
            UpdatefulOutcome::Converged { policy, .. } => {
                assert_eq!(policy.action(0), ACT_TWO_BOX)
            }
            other => panic!("expected convergence, got {other:?}"),
        }
    }

    #[test]
    fn twin_pd_updateless_cooperates_updateful_defects() {
        let p = twin_prisoners_dilemma();
        let ul = optimize_updateless(&p).unwrap();
        assert_eq!(ul.len(), 1);
        assert_eq!(ul[0].action(0), ACT_COOPERATE);
        assert_eq!(evaluate_updateless(&p, &ul[0]), rat(3, 1));
        match optimize_updateful(&p) {
            UpdatefulOutcome::Converged { policy, .. } => {
                assert_eq!(policy.action(0), ACT_DEFECT);
                assert_eq!(evaluate_updateless(&p, &policy), rat(1, 1));
            }
            other => panic!("expected convergence, got {other:?}"),
        }
    }

    #[test]
    fn updateless_weakly_dominates_updateful_on_fixtures() {
        for problem in [
            newcomb(rat(99, 100)),
            newcomb(rat(2, 5)),
            twin_prisoners_dilemma(),
            counterfactual_mugging_problem(rat(10_000, 1), rat(100, 1)),
            crate::newcomb::card::card_game(crate::newcomb::card::BobMode::BestResponse),
        ] {
            let ul = optimize_updateless(&problem).unwrap();
            let ul_value = evaluate_updateless(&problem, &ul[0]);
            if let UpdatefulOutcome::Converged { policy, .. } = optimize_updateful(&problem) {
                assert!(
                    ul_value >= evaluate_updateless(&problem, &policy),
                    "updateful beat updateless on {}",
                    problem.name
                );
            }
        }
    }

    #[test]
    fn mugging_large_win_pays_ex_ante() {
        let report = counterfactual_mugging(rat(10_000, 1), rat(100, 1)).unwrap();
        assert!(report.updateless_pays);
        assert!(!report.tie);
        assert_eq!(report.updateless_value, rat(4950, 1));
        assert!(!report.updateful_pays);
        assert_eq!(report.updateful_value, rat(0, 1));
    }

    #[test]
    fn mugging_zero_win_refuses() {
        let report = counterfactual_mugging(Rat::zero(), rat(100, 1)).unwrap();
        assert!(!report.updateless_pays);
        assert_eq!(report.updateless_value, Rat::zero());
    }

    #[test]
    fn mugging_equal_stakes_reports_tie() {
        let report = counterfactual_mugging(rat(100, 1), rat(100, 1)).unwrap();
        assert!(report.tie);
        assert_eq!(report.updateless_value, Rat::zero());
    }

    #[test]
    fn policy_count_small_fixtures() {
        assert_eq!(
            enumerate_policies(&counterfactual_mugging_problem(rat(1, 1), rat(1, 1)))
                .unwrap()
                .len(),
            4
        );
    }
}
