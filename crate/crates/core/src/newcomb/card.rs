//! The high/low card game: Alice sees a card and may reveal it; Bob then
//! reports his probability that the card is high. Alice loses the square of
//! Bob's report; Bob is scored by a proper (quadratic) rule, so his best
//! response is his true posterior given Alice's reporting policy.

use std::sync::Arc;

use num_traits::{One, Zero};

use super::problem::{rat, DecisionProblem, Policy, PureReaction, Rat};

pub const OBS_HIGH: usize = 0;
pub const OBS_LOW: usize = 1;
pub const ACT_REVEAL: usize = 0;
pub const ACT_HIDE: usize = 1;

/// What Bob sees after Alice moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signal {
    ShownHigh,
    ShownLow,
    Hidden,
}

/// Bob's reporting rule.
#[derive(Debug, Clone, PartialEq)]
pub enum BobMode {
    /// Report the exact posterior implied by Alice's policy.
    BestResponse,
    /// Ablation: a fixed report on the hidden signal; shown cards are still
    /// read off directly.
    FixedOnHidden(Rat),
}

/// Bob's report `p` given the signal and Alice's (possibly mixed) policy.
pub fn bob_report(mode: &BobMode, policy: &Policy, signal: Signal) -> Rat {
    match signal {
        Signal::ShownHigh => Rat::one(),
        Signal::ShownLow => Rat::zero(),
        Signal::Hidden => match mode {
            BobMode::FixedOnHidden(p) => p.clone(),
            BobMode::BestResponse => {
                // P(hidden | high) and P(hidden | low) under Alice's policy,
                // each card having prior 1/2.
                let hide_given_high = policy.action_weight(OBS_HIGH, ACT_HIDE);
                let hide_given_low = policy.action_weight(OBS_LOW, ACT_HIDE);
                let denom = hide_given_high.clone() + hide_given_low.clone();
                if denom.is_zero() {
                    // The hidden signal never occurs; report the prior.
                    rat(1, 2)
                } else {
                    hide_given_high / denom
                }
            }
        },
    }
}

/// The minimizer of Bob's expected quadratic loss given his posterior that
/// the card is high.
pub fn bob_best_response(posterior_high: &Rat) -> Rat {
    assert!(
        *posterior_high >= Rat::zero() && *posterior_high <= Rat::one(),
        "posterior must lie in [0, 1]"
    );
    posterior_high.clone()
}

/// Bob's expected quadratic loss for reporting `p` when the card is high
/// with probability `q`: q(1-p)^2 + (1-q)p^2.
pub fn bob_expected_loss(posterior_high: &Rat, report: &Rat) -> Rat {
    let one = Rat::one();
    let miss = one.clone() - report.clone();
    posterior_high.clone() * miss.clone() * miss
        + (one - posterior_high.clone()) * report.clone() * report.clone()
}

/// Build the card game as a decision problem for Alice.
pub fn card_game(bob: BobMode) -> DecisionProblem {
    let bob_payoff = bob.clone();
    DecisionProblem::new(
        "card_game",
        vec!["high".into(), "low".into()],
        vec!["reveal".into(), "hide".into()],
        vec![("high".into(), rat(1, 2)), ("low".into(), rat(1, 2))],
        Arc::new(|_policy, outcome| outcome),
        Arc::new(move |policy: &Policy, actor: &PureReaction, outcome| {
            let obs = outcome; // outcome 0 = high card, 1 = low card
            let action = actor.action(obs);
            let signal = match (obs, action) {
                (OBS_HIGH, ACT_REVEAL) => Signal::ShownHigh,
                (OBS_LOW, ACT_REVEAL) => Signal::ShownLow,
                (_, _) => Signal::Hidden,
            };
            let p = bob_report(&bob_payoff, policy, signal);
            -(p.clone() * p)
        }),
    )
    .expect("card game chance table is exact")
}

/// Alice's four pure policies by name, in enumeration order.
pub fn policy_label(reaction: &PureReaction) -> &'static str {
    match (reaction.action(OBS_HIGH), reaction.action(OBS_LOW)) {
        (ACT_REVEAL, ACT_REVEAL) => "reveal-always",
        (ACT_REVEAL, ACT_HIDE) => "reveal-iff-high",
        (ACT_HIDE, ACT_REVEAL) => "reveal-iff-low",
        (ACT_HIDE, ACT_HIDE) => "hide-always",
        _ => unreachable!(),
    }
}
