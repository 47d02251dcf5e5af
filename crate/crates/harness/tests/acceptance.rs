//! The acceptance suite: every pinned verification criterion as its own
//! test, printing one pass/fail line. `cargo test --test acceptance` and
//! `counterfact verify` run the same checks.

use counterfact::verify::{run_all, CriterionResult};

fn run_criterion(filter: &str) -> CriterionResult {
    let results = run_all(Some(filter));
    assert_eq!(
        results.len(),
        1,
        "filter `{filter}` must select exactly one criterion"
    );
    let result = results.into_iter().next().unwrap();
    let status = if result.passed { "PASS" } else { "FAIL" };
    println!(
        "[{status}] criterion {:2}: {} — {}",
        result.id, result.name, result.details
    );
    result
}

macro_rules! criterion_test {
    ($test_name:ident, $filter:literal) => {
        #[test]
        fn $test_name() {
            let result = run_criterion($filter);
            assert!(result.passed, "{}: {}", result.name, result.details);
        }
    };
}

criterion_test!(criterion_01_validity_and_oracle_agreement, "provability");
criterion_test!(criterion_02_five_and_ten_actions, "five-and-ten");
criterion_test!(criterion_03_obfuscation_crossover, "crossover");
criterion_test!(criterion_04_card_game_exact_values, "card game");
criterion_test!(criterion_05_predictor_threshold_and_twin, "predictor");
criterion_test!(criterion_06_mixture_regret_and_oscillation, "mixture");
criterion_test!(criterion_07_quantilizer_bound, "quantilizer");
criterion_test!(criterion_08_regressional_correction, "regressional");
criterion_test!(criterion_09_causal_demo, "causal");
criterion_test!(criterion_10_corrupted_reward_delegation, "delegation");
criterion_test!(criterion_11_wirehead_contrast, "seizure");
criterion_test!(criterion_12_program_trust, "program-trust");
criterion_test!(criterion_13_reproducibility_and_mutation, "reproducibility");

#[test]
fn all_thirteen_criteria_are_registered() {
    assert_eq!(run_all(None).len(), 13);
}
