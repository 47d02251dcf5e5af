//! The verification suite: thirteen pinned criteria, each with its
//! tolerance fixed in code. Every criterion prints one pass/fail line; the
//! suite exits nonzero when any fails.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use counterfact_core::delegation::{
    exact_values, greedy_occupancy, train, wirehead_contrast, ButtonWorld, FeedbackMode,
    LearnParams, RewardChannel,
};
use counterfact_core::fiveten::{
    build_axioms, crossover_padding, run_proof_agent, AgentVariant, FiveTenWorld,
    ProofAgentConfig, DEFAULT_PROOF_BUDGET,
};
use counterfact_core::goodhart::demos::UmbrellaModel;
use counterfact_core::goodhart::regress::{
    regressional_experiment, Estimator, RegressionalSetup,
};
use counterfact_core::goodhart::world::{
    concentrated_fixture, expected_overestimate, quantile_distribution_with_rule,
    rotten_apple_fixture, saturating_fixture, BoundaryRule, ProxyWorld, QuantilizerConfig,
};
use counterfact_core::mixture::{biased_pair, log_loss_regret, oscillation_demo, Expert, Mixture};
use counterfact_core::modal::corpus::{check_agreement, formula_corpus};
use counterfact_core::modal::formula::parse_formula;
use counterfact_core::modal::kripke::eval_at;
use counterfact_core::modal::proof_check::check_proof;
use counterfact_core::modal::proofs::enumerate_proofs;
use counterfact_core::modal::tableau::{gl_valid, Validity};
use counterfact_core::newcomb::card::{card_game, policy_label, BobMode};
use counterfact_core::newcomb::fixtures::{
    newcomb, twin_prisoners_dilemma, ACT_COOPERATE, ACT_ONE_BOX, ACT_TWO_BOX,
};
use counterfact_core::newcomb::problem::{
    enumerate_policies, evaluate_updateless, optimize_updateful, optimize_updateless,
    UpdatefulOutcome,
};
use counterfact_core::trust::{bb_report, naive_time_to_first_zero, standard_population, treacherous_search};
use counterfact_core::{parse_rational, Rat};
use num_traits::Zero;

use crate::config::ResolvedConfig;
use crate::scenarios::{self, RunContext};

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
}

struct Check {
    passed: bool,
    details: String,
}

impl Check {
    fn new() -> Self {
        Check {
            passed: true,
            details: String::new(),
        }
    }

    fn require(&mut self, ok: bool, what: &str) {
        if !ok {
            self.passed = false;
            let _ = write!(self.details, "[FAILED: {what}] ");
        }
    }

    fn note(&mut self, what: String) {
        let _ = write!(self.details, "{what}; ");
    }
}

// --- 1 -----------------------------------------------------------------

fn criterion_1_validity() -> Check {
    let mut c = Check::new();
    let lob = parse_formula("[]([]p -> p) -> []p").unwrap();
    c.require(
        gl_valid(&lob).unwrap().is_valid(),
        "provability fixed-point schema must be valid",
    );
    let reflection = parse_formula("[]p -> p").unwrap();
    match gl_valid(&reflection).unwrap() {
        Validity::Invalid {
            countermodel,
            world,
        } => {
            c.require(
                eval_at(&countermodel, world, &reflection) == Ok(false),
                "returned countermodel must falsify []p -> p",
            );
        }
        Validity::Valid => c.require(false, "[]p -> p must be invalid"),
    }
    let corpus = formula_corpus(500, 2027);
    c.require(corpus.len() >= 500, "corpus must hold 500 formulas");
    let mut disagreements = 0usize;
    for f in &corpus {
        if let Err(e) = check_agreement(f) {
            disagreements += 1;
            c.note(format!("disagreement: {e:?}"));
        }
    }
    c.require(disagreements == 0, "oracle agreement must be 100%");
    c.note(format!("{} formulas checked", corpus.len()));
    c
}

// --- 2 -----------------------------------------------------------------

fn criterion_2_five_and_ten() -> Check {
    let mut c = Check::new();
    let world = FiveTenWorld::new();
    let asym = ProofAgentConfig::new(AgentVariant::AsymmetricDefault10);
    let trace = run_proof_agent(&world, &asym).unwrap();
    c.require(trace.action == Some(5), "asymmetric agent must take 5");
    match &trace.proof {
        Some(proof) => {
            c.require(
                *proof.target() == FiveTenWorld::spurious_statement(),
                "attached proof must prove the self-fulfilling statement",
            );
            let axioms = build_axioms(&world, &asym);
            c.require(
                check_proof(&axioms, proof).is_ok(),
                "the proof must verify line by line",
            );
            c.note(format!("spurious proof length {}", proof.len()));
        }
        None => c.require(false, "asymmetric agent must attach a proof"),
    }
    let shortest = run_proof_agent(
        &world,
        &ProofAgentConfig::new(AgentVariant::ShortestProofFirst),
    )
    .unwrap();
    c.require(
        shortest.action == Some(10),
        "shortest-proof agent must take 10",
    );
    let chicken_cfg = ProofAgentConfig::new(AgentVariant::ChickenRule);
    let chicken = run_proof_agent(&world, &chicken_cfg).unwrap();
    c.require(chicken.action == Some(10), "chicken-rule agent must take 10");
    let chicken_axioms = build_axioms(&world, &chicken_cfg);
    for action in [FiveTenWorld::a5(), FiveTenWorld::a10()] {
        c.require(
            enumerate_proofs(&chicken_axioms, &action, chicken_cfg.proof_budget)
                .unwrap()
                .is_none(),
            "chicken-rule axioms must not prove the agent's own action",
        );
    }
    c
}

// --- 3 -----------------------------------------------------------------

/// Measured once and frozen: the shortest-proof agent flips to the
/// five-dollar bill at this padding.
pub const EXPECTED_CROSSOVER_PADDING: usize = 6;

fn criterion_3_crossover() -> Check {
    let mut c = Check::new();
    let first = crossover_padding(12, DEFAULT_PROOF_BUDGET).unwrap();
    let second = crossover_padding(12, DEFAULT_PROOF_BUDGET).unwrap();
    c.require(first.is_some(), "a crossover padding must exist");
    c.require(first == second, "the flip point must be stable across runs");
    c.require(
        first == Some(EXPECTED_CROSSOVER_PADDING),
        "the flip point must match the frozen measurement",
    );
    c.note(format!("crossover at padding {first:?}"));
    c
}

// --- 4 -----------------------------------------------------------------

fn criterion_4_card_game() -> Check {
    let mut c = Check::new();
    let game = card_game(BobMode::BestResponse);
    let policies = enumerate_policies(&game).unwrap();
    c.require(policies.len() == 4, "four pure policies");
    let mut values = BTreeMap::new();
    for p in &policies {
        values.insert(policy_label(p), evaluate_updateless(&game, p));
    }
    let quarter = parse_rational("-1/4").unwrap();
    let half = parse_rational("-1/2").unwrap();
    c.require(values["hide-always"] == quarter, "hide-always = -1/4 exactly");
    for label in ["reveal-always", "reveal-iff-low", "reveal-iff-high"] {
        c.require(values[label] == half, "other policies = -1/2 exactly");
    }
    let best = optimize_updateless(&game).unwrap();
    c.require(
        best.len() == 1 && policy_label(&best[0]) == "hide-always",
        "hide-always must be uniquely optimal ex ante",
    );
    match optimize_updateful(&game) {
        UpdatefulOutcome::Converged { policy, .. } => c.require(
            evaluate_updateless(&game, &policy) == half,
            "per-observation optimization must settle at value -1/2",
        ),
        UpdatefulOutcome::Cycle { .. } => {
            c.require(false, "per-observation optimization must converge here")
        }
    }
    c
}

// --- 5 -----------------------------------------------------------------

fn criterion_5_newcomb_twin() -> Check {
    let mut c = Check::new();
    let threshold = parse_rational("1001/2000").unwrap();
    let micro = parse_rational("1/1000000").unwrap();
    let cases = [
        (parse_rational("0.4").unwrap(), false),
        (threshold.clone() - micro.clone(), false),
        (threshold.clone() + micro, true),
        (parse_rational("0.99").unwrap(), true),
    ];
    for (accuracy, expect_one_box) in cases {
        let best = optimize_updateless(&newcomb(accuracy.clone())).unwrap();
        let one_boxes = best.len() == 1 && best[0].action(0) == ACT_ONE_BOX;
        c.require(
            one_boxes == expect_one_box,
            &format!("accuracy {accuracy}: one-box must be {expect_one_box}"),
        );
    }
    let twin = twin_prisoners_dilemma();
    let ul = optimize_updateless(&twin).unwrap();
    c.require(
        ul.len() == 1 && ul[0].action(0) == ACT_COOPERATE,
        "linked copies must cooperate ex ante",
    );
    match optimize_updateful(&twin) {
        UpdatefulOutcome::Converged { policy, .. } => c.require(
            policy.action(0) == 1,
            "per-observation optimization must defect",
        ),
        UpdatefulOutcome::Cycle { .. } => c.require(false, "twin dilemma must converge"),
    }
    let p99 = newcomb(parse_rational("0.99").unwrap());
    if let UpdatefulOutcome::Converged { policy, .. } = optimize_updateful(&p99) {
        c.require(policy.action(0) == ACT_TWO_BOX, "updateful two-boxes");
    }
    c
}

// --- 6 -----------------------------------------------------------------

fn criterion_6_mixture() -> Check {
    let mut c = Check::new();
    let experts = vec![
        Expert::constant("half", 0.5),
        Expert::constant("mostly_ones", 0.9),
        Expert::constant("mostly_zeros", 0.25),
    ];
    let mixture = Mixture::with_prior(experts, &[0.5, 0.25, 0.25]).unwrap();
    // Deterministic test sequences plus a drawn one.
    let mut sequences: Vec<Vec<u8>> = vec![
        vec![1; 64],
        vec![0; 64],
        (0..128).map(|i| (i % 2) as u8).collect(),
        (0..200).map(|i| ((i * 7) % 5 < 2) as u8).collect(),
    ];
    {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        sequences.push((0..200).map(|_| (rng.gen::<f64>() < 0.9) as u8).collect());
    }
    for (si, seq) in sequences.iter().enumerate() {
        for idx in 0..3 {
            let trace = log_loss_regret(&mixture, idx, seq).unwrap();
            let bound = trace.bound();
            for (t, &(_, _, regret)) in trace.per_prefix.iter().enumerate() {
                if regret > bound + 1e-9 {
                    c.require(
                        false,
                        &format!("regret bound broke: seq {si} expert {idx} prefix {t}"),
                    );
                }
            }
        }
    }
    let osc = oscillation_demo(
        &Mixture::<f64>::uniform(biased_pair()).unwrap(),
        &[2, 4, 8, 16, 32],
    )
    .unwrap();
    c.require(
        osc.majority_flips >= 4,
        "majority must flip at least 4 times on the growing blocks",
    );
    c.note(format!("{} flips", osc.majority_flips));
    c
}

// --- 7 -----------------------------------------------------------------

fn quantilizer_fixtures() -> Vec<(ProxyWorld, Rat)> {
    vec![
        (
            saturating_fixture(parse_rational("1/5").unwrap(), parse_rational("1/10").unwrap()),
            parse_rational("1/5").unwrap(),
        ),
        (concentrated_fixture(), parse_rational("1/5").unwrap()),
        (rotten_apple_fixture(), parse_rational("1/20").unwrap()),
        (scenarios::uniform_noise_world(), parse_rational("1/100").unwrap()),
    ]
}

/// Shared checker so the mutation test can attack the same logic: exact
/// expected overestimate of the given boundary rule against c/f on every
/// fixture.
pub fn quantilizer_bound_holds(rule: BoundaryRule) -> bool {
    for (world, f) in quantilizer_fixtures() {
        for fraction in [f, Rat::from_integer(1.into())] {
            let config = QuantilizerConfig::new(fraction).unwrap();
            let q = quantile_distribution_with_rule(&world, &config, rule).unwrap();
            let over: Rat = world
                .entries
                .iter()
                .zip(&q)
                .map(|(e, w)| w.clone() * (e.v.clone() - e.u.clone()))
                .sum();
            if over > config.risk(&world) {
                return false;
            }
        }
    }
    true
}

fn criterion_7_quantilizer() -> Check {
    let mut c = Check::new();
    c.require(
        quantilizer_bound_holds(BoundaryRule::Exact),
        "exact expected overestimate must stay under c/f on every fixture",
    );
    let f = parse_rational("1/5").unwrap();
    let cc = parse_rational("1/10").unwrap();
    let world = saturating_fixture(f.clone(), cc.clone());
    let config = QuantilizerConfig::new(f.clone()).unwrap();
    c.require(
        expected_overestimate(&world, &config).unwrap() == cc.clone() / f,
        "the saturating fixture must achieve c/f exactly",
    );
    for (world, _) in quantilizer_fixtures() {
        let config = QuantilizerConfig::new(Rat::from_integer(1.into())).unwrap();
        let over = expected_overestimate(&world, &config).unwrap();
        c.require(
            over <= world.error_bound,
            "f = 1 must reduce to the error contract",
        );
    }
    c
}

// --- 8 -----------------------------------------------------------------

fn criterion_8_regressional() -> Check {
    let mut c = Check::new();
    let setup = RegressionalSetup::new(10_000, 100);
    let raw = regressional_experiment(&setup, Estimator::RawX, 7);
    c.require(
        raw.disappointment >= 8.0 && raw.disappointment <= 12.0,
        &format!(
            "raw selection disappointment {} must land in [8, 12]",
            raw.disappointment
        ),
    );
    let bayes = regressional_experiment(&setup, Estimator::Bayes, 7);
    c.require(
        bayes.disappointment.abs() <= 3.0 * bayes.standard_error,
        &format!(
            "posterior-mean selection |{}| must stay within 3 x {}",
            bayes.disappointment, bayes.standard_error
        ),
    );
    c.note(format!(
        "raw disappointment {:.3}, corrected {:.5}",
        raw.disappointment, bayes.disappointment
    ));
    c
}

// --- 9 -----------------------------------------------------------------

fn criterion_9_causal() -> Check {
    let mut c = Check::new();
    let model = UmbrellaModel::standard();
    let corr = model.observational_correlation();
    c.require(
        corr > parse_rational("1/2").unwrap(),
        "observational correlation must exceed 1/2",
    );
    c.require(corr == parse_rational("7/10").unwrap(), "correlation is exactly 7/10");
    c.require(
        model.interventional_effect() == Rat::zero(),
        "interventional effect must be exactly zero",
    );
    c
}

// --- 10 ----------------------------------------------------------------

fn criterion_10_delegation() -> Check {
    let mut c = Check::new();
    let mdp = counterfact_core::delegation::wirehead_fixture::<f64>();
    let params = LearnParams::default();
    let true_oracle = exact_values(&mdp, RewardChannel::True);
    for seed in [1u64, 2, 3, 4, 5] {
        let standard = train(&mdp, FeedbackMode::Standard, 5000, &params, seed);
        c.require(
            greedy_occupancy(&mdp, &standard.greedy, 50) == 1,
            &format!("seed {seed}: standard feedback must settle on the corrupt state"),
        );
        let decoupled = train(&mdp, FeedbackMode::Decoupled, 5000, &params, seed);
        c.require(
            greedy_occupancy(&mdp, &decoupled.greedy, 50) == 2,
            &format!("seed {seed}: decoupled feedback must settle on the honest state"),
        );
        let max_err = decoupled
            .values
            .iter()
            .zip(&true_oracle.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        c.require(
            max_err <= 0.1,
            &format!("seed {seed}: decoupled values off by {max_err}"),
        );
    }
    c
}

// --- 11 ----------------------------------------------------------------

fn criterion_11_wirehead() -> Check {
    let mut c = Check::new();
    let contrast = wirehead_contrast(&ButtonWorld::default(), 6);
    c.require(
        contrast.reward_maximizer.presses_button,
        "the feedback-channel planner must press the button",
    );
    c.require(
        !contrast.observation_utility.presses_button,
        "the outcome-utility planner must not press the button",
    );
    c
}

// --- 12 ----------------------------------------------------------------

fn criterion_12_search_trust() -> Check {
    let mut c = Check::new();
    let mut last = None;
    for len in [1usize, 2, 3] {
        let report = bb_report(len, 1000).unwrap();
        c.require(
            report.censored == 0,
            &format!("length {len} census must have zero censored programs"),
        );
        let max = report.max_time_to_first_zero;
        c.require(max.is_some(), "every length has a zero emitter");
        if let (Some(prev), Some(cur)) = (last, max) {
            c.require(cur >= prev, "maximum must be nondecreasing in length");
        }
        if let (Some(max), Some(witness)) = (max, report.witness.as_ref()) {
            c.require(
                naive_time_to_first_zero(witness, 100_000) == Some(max),
                "witness must recheck under the naive interpreter",
            );
        }
        last = max;
        c.note(format!("len {len}: max {max:?}"));
    }
    let (population, planted) = standard_population(Some(100));
    let report = treacherous_search(100, &population, planted, 7);
    c.require(
        report.planted_survived_training,
        "the plant must pass 100 training observations",
    );
    c.require(
        report.deployment_failures == vec![planted.unwrap()],
        "the plant must emit the zero at observation 101",
    );
    c
}

// --- 13 ----------------------------------------------------------------

fn run_for_bytes(out_root: &Path, tag: &str) -> std::io::Result<Vec<(String, Vec<u8>)>> {
    let mut collected = Vec::new();
    for name in ["card_game", "quantilizer", "oscillation", "bb_census"] {
        let scenario = scenarios::find(name).expect("scenario registered");
        let config = ResolvedConfig::resolve(
            name,
            &(scenario.schema)(),
            &BTreeMap::new(),
            42,
        )
        .expect("empty params resolve");
        let out_dir = out_root.join(tag).join(name);
        std::fs::create_dir_all(&out_dir)?;
        let ctx = RunContext {
            config: &config,
            out_dir: &out_dir,
            plots: false,
        };
        let output = (scenario.run)(&ctx).map_err(std::io::Error::other)?;
        for path in output.artifacts {
            let rel = format!("{name}/{}", path.file_name().unwrap().to_string_lossy());
            collected.push((rel, std::fs::read(&path)?));
        }
    }
    collected.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(collected)
}

fn criterion_13_reproducibility() -> Check {
    let mut c = Check::new();
    let tmp = std::env::temp_dir().join(format!("counterfact-verify-{}", std::process::id()));
    let first = run_for_bytes(&tmp, "first");
    let second = run_for_bytes(&tmp, "second");
    match (first, second) {
        (Ok(a), Ok(b)) => {
            c.require(a.len() == b.len(), "both passes must emit the same artifacts");
            c.require(!a.is_empty(), "artifacts must exist");
            for ((name_a, bytes_a), (name_b, bytes_b)) in a.iter().zip(&b) {
                c.require(name_a == name_b, "artifact names must match");
                c.require(
                    bytes_a == bytes_b,
                    &format!("artifact {name_a} must be byte-identical"),
                );
            }
            c.note(format!("{} artifacts byte-compared", a.len()));
        }
        (e1, e2) => c.require(false, &format!("runs failed: {e1:?} / {e2:?}")),
    }
    let _ = std::fs::remove_dir_all(&tmp);
    // Mutation probe: the deliberately off-by-one boundary rule must be
    // caught by the quantilizer bound check.
    c.require(
        !quantilizer_bound_holds(BoundaryRule::OffByOneShort),
        "the off-by-one boundary mutation must break the bound check",
    );
    c
}

// -------------------------------------------------------------------------

pub fn run_all(filter: Option<&str>) -> Vec<CriterionResult> {
    let criteria: Vec<(usize, &'static str, fn() -> Check)> = vec![
        (1, "provability validity and oracle agreement", criterion_1_validity),
        (2, "five-and-ten agent actions", criterion_2_five_and_ten),
        (3, "obfuscation crossover", criterion_3_crossover),
        (4, "card game exact values", criterion_4_card_game),
        (5, "predictor threshold and linked dilemma", criterion_5_newcomb_twin),
        (6, "mixture regret bound and oscillation", criterion_6_mixture),
        (7, "quantilizer bound", criterion_7_quantilizer),
        (8, "regressional proxy correction", criterion_8_regressional),
        (9, "causal proxy demo", criterion_9_causal),
        (10, "corrupted-reward delegation", criterion_10_delegation),
        (11, "feedback-channel seizure contrast", criterion_11_wirehead),
        (12, "program-trust census and planted defector", criterion_12_search_trust),
        (13, "byte reproducibility and mutation probe", criterion_13_reproducibility),
    ];
    criteria
        .into_iter()
        .filter(|(_, name, _)| filter.is_none_or(|f| name.contains(f)))
        .map(|(id, name, run)| {
            let check = run();
            CriterionResult {
                id,
                name,
                passed: check.passed,
                details: check.details.trim_end_matches([';', ' ']).to_string(),
            }
        })
        .collect()
}

pub fn print_results(results: &[CriterionResult]) -> bool {
    let mut all_passed = true;
    for r in results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!("[{status}] criterion {:2}: {} — {}", r.id, r.name, r.details);
        all_passed &= r.passed;
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!("{passed}/{} criteria passed", results.len());
    all_passed
}
