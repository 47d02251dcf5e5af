//! Newcomblike decision problems: exhaustive policy enumeration, updateless
//! vs. per-observation optimization, the high/low card game, predictor
//! fixtures, and the rock-paper-scissors equilibrium check. Everything in
//! this module uses exact rational arithmetic.

pub mod card;
pub mod fixtures;
pub mod problem;
pub mod rps;

pub use card::{bob_best_response, bob_expected_loss, card_game, BobMode};
pub use fixtures::{
    counterfactual_mugging, newcomb, twin_prisoners_dilemma, MuggingReport,
};
pub use problem::{
    enumerate_policies, evaluate_updateless, optimize_updateful, optimize_updateless,
    DecisionProblem, Policy, ProblemError, PureReaction, Rat, UpdatefulOutcome,
};
pub use rps::{rps_equilibrium_check, standard_rps, Matrix3};
