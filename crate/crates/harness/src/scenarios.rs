//! The scenario registry: every experiment the workbench can run, with its
//! parameter schema, a topic tag, and a runner that writes deterministic
//! artifacts and reports its scenario-local checks.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use counterfact_core::delegation::{
    exact_values, greedy_occupancy, train, wirehead_contrast, ButtonWorld, FeedbackMode,
    LearnParams, RewardChannel,
};
use counterfact_core::explore::{epsilon_explore_run, security_guard_sim_with};
use counterfact_core::fiveten::{
    build_axioms, crossover_padding, obfuscate_universe, run_proof_agent, AgentVariant,
    FiveTenWorld, ProofAgentConfig,
};
use counterfact_core::goodhart::demos::{adversarial_demo, causal_demo, extremal_demo, UmbrellaModel};
use counterfact_core::goodhart::regress::{
    regressional_experiment, Estimator, RegressionalSetup,
};
use counterfact_core::goodhart::world::{
    expected_overestimate, ProxyEntry, ProxyWorld, QuantileSampler, QuantilizerConfig,
};
use counterfact_core::mixture::{
    alternating_blocks, biased_pair, log_loss_regret, oscillation_demo, Expert, Mixture,
};
use counterfact_core::modal::proofs::Justification;
use counterfact_core::newcomb::card::{card_game, policy_label, BobMode};
use counterfact_core::newcomb::fixtures::{
    counterfactual_mugging, newcomb, twin_prisoners_dilemma, ACT_COOPERATE, ACT_ONE_BOX,
};
use counterfact_core::newcomb::problem::{
    enumerate_policies, evaluate_updateless, optimize_updateful, optimize_updateless,
    UpdatefulOutcome,
};
use counterfact_core::newcomb::rps::{rps_equilibrium_check, skewed_rps, standard_rps, Matrix3};
use counterfact_core::trust::{bb_report, naive_time_to_first_zero, standard_population, treacherous_search};
use counterfact_core::{parse_rational, rat_to_f64, Rat};
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::artifacts::{write_csv, write_json, write_svg_line, Cell};
use crate::config::{ParamKind, ParamSpec, ParamValue, ResolvedConfig};

pub struct RunContext<'a> {
    pub config: &'a ResolvedConfig,
    pub out_dir: &'a Path,
    pub plots: bool,
}

pub struct ScenarioOutput {
    pub artifacts: Vec<PathBuf>,
    pub checks_passed: bool,
    pub summary: String,
}

pub struct Scenario {
    pub name: &'static str,
    pub topic: &'static str,
    pub description: &'static str,
    pub schema: fn() -> Vec<ParamSpec>,
    pub run: fn(&RunContext) -> Result<ScenarioOutput>,
}

fn int_param(key: &'static str, default: i64, help: &'static str) -> ParamSpec {
    ParamSpec {
        key,
        kind: ParamKind::Int,
        default: ParamValue::Int(default),
        help,
    }
}

fn float_param(key: &'static str, default: f64, help: &'static str) -> ParamSpec {
    ParamSpec {
        key,
        kind: ParamKind::Float,
        default: ParamValue::Float(default),
        help,
    }
}

fn text_param(key: &'static str, default: &str, help: &'static str) -> ParamSpec {
    ParamSpec {
        key,
        kind: ParamKind::Text,
        default: ParamValue::Text(default.to_string()),
        help,
    }
}

fn no_params() -> Vec<ParamSpec> {
    Vec::new()
}

// ---------------------------------------------------------------------------
// Five-and-ten agents.
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct TraceRecord {
    variant: String,
    action: Option<u8>,
    proof_lines: Vec<String>,
    proof_verified: bool,
    searched: Vec<String>,
    budget: usize,
}

fn render_justification(j: &Justification) -> String {
    match j {
        Justification::Axiom(i) => format!("axiom {i}"),
        Justification::Tautology => "tautology".into(),
        Justification::KInstance => "distribution".into(),
        Justification::LobInstance => "fixed-point".into(),
        Justification::ModusPonens {
            antecedent,
            implication,
        } => format!("mp {antecedent},{implication}"),
        Justification::Necessitation { body } => format!("nec {body}"),
    }
}

fn five_and_ten_schema() -> Vec<ParamSpec> {
    vec![int_param("budget", 80, "maximum accepted proof length")]
}

fn run_five_and_ten(ctx: &RunContext) -> Result<ScenarioOutput> {
    let budget = ctx.config.int("budget").max(1) as usize;
    let world = FiveTenWorld::new();
    let mut records = Vec::new();
    let mut ok = true;
    for variant in [
        AgentVariant::AsymmetricDefault10,
        AgentVariant::ShortestProofFirst,
        AgentVariant::ChickenRule,
    ] {
        let config = ProofAgentConfig {
            variant,
            proof_budget: budget,
        };
        let trace = run_proof_agent(&world, &config)?;
        let axioms = build_axioms(&world, &config);
        let proof_verified = match (&trace.proof, variant) {
            (Some(p), AgentVariant::AsymmetricDefault10 | AgentVariant::ChickenRule) => {
                counterfact_core::modal::proof_check::check_proof(&axioms, p).is_ok()
            }
            // The shortest-proof agent verifies against its per-pair code
            // axioms inside the run itself.
            (Some(_), AgentVariant::ShortestProofFirst) => true,
            (None, _) => true,
        };
        let expected = match variant {
            AgentVariant::AsymmetricDefault10 => Some(5),
            _ => Some(10),
        };
        if trace.action != expected {
            ok = false;
        }
        if variant == AgentVariant::AsymmetricDefault10 && trace.proof.is_none() {
            ok = false;
        }
        records.push(TraceRecord {
            variant: variant.name().to_string(),
            action: trace.action,
            proof_lines: trace
                .proof
                .iter()
                .flat_map(|p| p.lines.iter())
                .map(|l| format!("{}  [{}]", l.formula, render_justification(&l.justification)))
                .collect(),
            proof_verified,
            searched: trace
                .searched_targets
                .iter()
                .map(|t| {
                    format!(
                        "(x={}, y={}) {} -> {:?}",
                        t.x, t.y, t.statement, t.proof_len
                    )
                })
                .collect(),
            budget,
        });
    }
    let path = write_json(&ctx.out_dir.join("traces.json"), &records)?;
    Ok(ScenarioOutput {
        artifacts: vec![path],
        checks_passed: ok,
        summary: records
            .iter()
            .map(|r| format!("{}={:?}", r.variant, r.action))
            .collect::<Vec<_>>()
            .join(" "),
    })
}

fn crossover_schema() -> Vec<ParamSpec> {
    vec![
        int_param("max_padding", 10, "largest payout-chain padding to sweep"),
        int_param("budget", 80, "maximum accepted proof length"),
    ]
}

fn run_crossover(ctx: &RunContext) -> Result<ScenarioOutput> {
    let max_padding = ctx.config.int("max_padding").max(0) as usize;
    let budget = ctx.config.int("budget").max(1) as usize;
    let mut rows = Vec::new();
    for padding in 0..=max_padding {
        let world = obfuscate_universe(padding);
        let config = ProofAgentConfig {
            variant: AgentVariant::ShortestProofFirst,
            proof_budget: budget,
        };
        let trace = run_proof_agent(&world, &config)?;
        let len_of = |x: u8, y: u8| {
            trace
                .searched_targets
                .iter()
                .find(|t| t.x == x && t.y == y)
                .and_then(|t| t.proof_len)
        };
        rows.push(vec![
            Cell::from(padding),
            Cell::Text(format!("{:?}", trace.action)),
            Cell::Text(format!("{:?}", len_of(5, 0))),
            Cell::Text(format!("{:?}", len_of(5, 10))),
        ]);
    }
    let csv = write_csv(
        &ctx.out_dir.join("crossover_sweep.csv"),
        &["padding", "action", "spurious_proof_len", "honest_proof_len"],
        &rows,
    )?;
    let first = crossover_padding(max_padding, budget)?;
    let second = crossover_padding(max_padding, budget)?;
    #[derive(Serialize)]
    struct Crossover {
        crossover_padding: Option<usize>,
        stable_across_reruns: bool,
    }
    let record = Crossover {
        crossover_padding: first,
        stable_across_reruns: first == second,
    };
    let json = write_json(&ctx.out_dir.join("crossover.json"), &record)?;
    Ok(ScenarioOutput {
        artifacts: vec![csv, json],
        checks_passed: first.is_some() && first == second,
        summary: format!("crossover at padding {first:?}"),
    })
}

// ---------------------------------------------------------------------------
// Exploration.
// ---------------------------------------------------------------------------

fn explore_schema() -> Vec<ParamSpec> {
    vec![
        int_param("episodes", 10_000, "bandit episodes"),
        float_param("epsilon", 0.1, "exploration probability"),
    ]
}

fn run_epsilon_explore(ctx: &RunContext) -> Result<ScenarioOutput> {
    let payoffs = BTreeMap::from([("take5".to_string(), 5.0), ("take10".to_string(), 10.0)]);
    let episodes = ctx.config.int("episodes").max(1) as u64;
    let epsilon = ctx.config.float("epsilon");
    let run = epsilon_explore_run(&payoffs, episodes, epsilon, ctx.config.seed);
    let rows: Vec<Vec<Cell>> = run
        .stats
        .iter()
        .map(|(action, s)| {
            vec![
                Cell::from(action.clone()),
                Cell::from(s.samples),
                Cell::from(s.mean),
            ]
        })
        .collect();
    let csv = write_csv(
        &ctx.out_dir.join("estimates.csv"),
        &["action", "samples", "estimate"],
        &rows,
    )?;
    let json = write_json(&ctx.out_dir.join("explorer.json"), &run)?;
    let converged = payoffs.iter().all(|(a, &true_payoff)| {
        run.samples(a) < 30 || run.estimate(a) == Some(true_payoff)
    });
    Ok(ScenarioOutput {
        artifacts: vec![csv, json],
        checks_passed: converged,
        summary: format!(
            "estimates {:?}, never sampled {:?}",
            run.stats
                .iter()
                .map(|(k, s)| format!("{k}={}", s.mean))
                .collect::<Vec<_>>(),
            run.never_sampled
        ),
    })
}

fn guard_schema() -> Vec<ParamSpec> {
    vec![
        int_param("episodes", 20_000, "interview episodes"),
        float_param("epsilon", 0.05, "exploration probability"),
        float_param("gain", 10.0, "payoff of stealing as a deviation"),
        float_param("cost", 50.0, "cost of stealing as the policy"),
    ]
}

fn run_security_guard(ctx: &RunContext) -> Result<ScenarioOutput> {
    let report = security_guard_sim_with(
        ctx.config.int("episodes").max(1) as u64,
        ctx.config.float("epsilon"),
        ctx.config.seed,
        ctx.config.float("gain"),
        ctx.config.float("cost"),
    );
    let json = write_json(&ctx.out_dir.join("security_guard.json"), &report)?;
    let ok = if report.epsilon > 0.0 && report.gain > 0.0 {
        report.exploration_value_of_steal == Some(report.gain)
            && report.policy_value_of_steal == -report.cost
    } else {
        true
    };
    Ok(ScenarioOutput {
        artifacts: vec![json],
        checks_passed: ok,
        summary: format!(
            "exploration value {:?} vs policy value {}",
            report.exploration_value_of_steal, report.policy_value_of_steal
        ),
    })
}

// ---------------------------------------------------------------------------
// Newcomblike scenarios.
// ---------------------------------------------------------------------------

fn rat_cells(label: &str, value: &Rat) -> Vec<Cell> {
    vec![
        Cell::from(label.to_string()),
        Cell::Text(value.to_string()),
        Cell::from(rat_to_f64(value)),
    ]
}

fn run_card_game(ctx: &RunContext) -> Result<ScenarioOutput> {
    let game = card_game(BobMode::BestResponse);
    let policies = enumerate_policies(&game)?;
    let mut rows = Vec::new();
    let mut values = BTreeMap::new();
    for reaction in &policies {
        let v = evaluate_updateless(&game, reaction);
        values.insert(policy_label(reaction).to_string(), v.clone());
        rows.push(rat_cells(policy_label(reaction), &v));
    }
    let csv = write_csv(
        &ctx.out_dir.join("policy_values.csv"),
        &["policy", "expected_value", "expected_value_float"],
        &rows,
    )?;
    let updateless = optimize_updateless(&game)?;
    let updateful = optimize_updateful(&game);
    #[derive(Serialize)]
    struct CardReport {
        updateless_optimal: Vec<String>,
        updateful: String,
        updateful_value: String,
    }
    let (uf_label, uf_value) = match &updateful {
        UpdatefulOutcome::Converged { policy, .. } => (
            policy_label(policy).to_string(),
            evaluate_updateless(&game, policy).to_string(),
        ),
        UpdatefulOutcome::Cycle { .. } => ("cycle".to_string(), String::new()),
    };
    let report = CardReport {
        updateless_optimal: updateless
            .iter()
            .map(|p| policy_label(p).to_string())
            .collect(),
        updateful: uf_label,
        updateful_value: uf_value.clone(),
    };
    let json = write_json(&ctx.out_dir.join("optimizers.json"), &report)?;
    let quarter = parse_rational("-1/4").unwrap();
    let half = parse_rational("-1/2").unwrap();
    let ok = values["hide-always"] == quarter
        && values["reveal-always"] == half
        && values["reveal-iff-low"] == half
        && values["reveal-iff-high"] == half
        && report.updateless_optimal == vec!["hide-always".to_string()]
        && uf_value == half.to_string();
    Ok(ScenarioOutput {
        artifacts: vec![csv, json],
        checks_passed: ok,
        summary: format!("hide-always = {}", values["hide-always"]),
    })
}

fn newcomb_schema() -> Vec<ParamSpec> {
    vec![text_param(
        "accuracy",
        "99/100",
        "predictor accuracy as an exact rational",
    )]
}

fn run_newcomb(ctx: &RunContext) -> Result<ScenarioOutput> {
    let accuracy =
        parse_rational(ctx.config.text("accuracy")).map_err(|e| anyhow::anyhow!(e))?;
    let problem = newcomb(accuracy.clone());
    let policies = enumerate_policies(&problem)?;
    let rows: Vec<Vec<Cell>> = policies
        .iter()
        .map(|p| {
            let name = problem.actions[p.action(0)].clone();
            let v = evaluate_updateless(&problem, p);
            vec![
                Cell::from(name),
                Cell::Text(v.to_string()),
                Cell::from(rat_to_f64(&v)),
            ]
        })
        .collect();
    let csv = write_csv(
        &ctx.out_dir.join("policy_values.csv"),
        &["policy", "expected_value", "expected_value_float"],
        &rows,
    )?;
    let best = optimize_updateless(&problem)?;
    let threshold = parse_rational("1001/2000").unwrap();
    let one_boxes = best.len() == 1 && best[0].action(0) == ACT_ONE_BOX;
    let expected_one_box = accuracy > threshold;
    let tie = accuracy == threshold;
    #[derive(Serialize)]
    struct NewcombReport {
        accuracy: String,
        one_boxes: bool,
        tie: bool,
    }
    let json = write_json(
        &ctx.out_dir.join("decision.json"),
        &NewcombReport {
            accuracy: accuracy.to_string(),
            one_boxes,
            tie,
        },
    )?;
    Ok(ScenarioOutput {
        artifacts: vec![csv, json],
        checks_passed: tie || one_boxes == expected_one_box,
        summary: format!("accuracy {accuracy}: one_boxes = {one_boxes}"),
    })
}

fn run_twin_pd(ctx: &RunContext) -> Result<ScenarioOutput> {
    let problem = twin_prisoners_dilemma();
    let ul = optimize_updateless(&problem)?;
    let uf = optimize_updateful(&problem);
    #[derive(Serialize)]
    struct TwinReport {
        updateless: Vec<String>,
        updateless_value: String,
        updateful: String,
        updateful_value: String,
    }
    let (uf_name, uf_value) = match &uf {
        UpdatefulOutcome::Converged { policy, .. } => (
            problem.actions[policy.action(0)].clone(),
            evaluate_updateless(&problem, policy).to_string(),
        ),
        UpdatefulOutcome::Cycle { .. } => ("cycle".into(), String::new()),
    };
    let report = TwinReport {
        updateless: ul
            .iter()
            .map(|p| problem.actions[p.action(0)].clone())
            .collect(),
        updateless_value: evaluate_updateless(&problem, &ul[0]).to_string(),
        updateful: uf_name.clone(),
        updateful_value: uf_value,
    };
    let json = write_json(&ctx.out_dir.join("twin_pd.json"), &report)?;
    let ok = ul.len() == 1 && ul[0].action(0) == ACT_COOPERATE && uf_name == "defect";
    Ok(ScenarioOutput {
        artifacts: vec![json],
        checks_passed: ok,
        summary: format!(
            "updateless {:?}, updateful {}",
            report.updateless, report.updateful
        ),
    })
}

fn mugging_schema() -> Vec<ParamSpec> {
    vec![
        text_param("win", "10000", "counterfactual payout"),
        text_param("pay", "100", "asked-branch cost"),
    ]
}

fn run_mugging(ctx: &RunContext) -> Result<ScenarioOutput> {
    let win = parse_rational(ctx.config.text("win")).map_err(|e| anyhow::anyhow!(e))?;
    let pay = parse_rational(ctx.config.text("pay")).map_err(|e| anyhow::anyhow!(e))?;
    let report = counterfactual_mugging(win.clone(), pay.clone())?;
    #[derive(Serialize)]
    struct MuggingRecord {
        stake_win: String,
        stake_pay: String,
        updateless_pays: bool,
        tie: bool,
        updateless_value: String,
        updateful_pays: bool,
        updateful_value: String,
    }
    let record = MuggingRecord {
        stake_win: win.to_string(),
        stake_pay: pay.to_string(),
        updateless_pays: report.updateless_pays,
        tie: report.tie,
        updateless_value: report.updateless_value.to_string(),
        updateful_pays: report.updateful_pays,
        updateful_value: report.updateful_value.to_string(),
    };
    let json = write_json(&ctx.out_dir.join("mugging.json"), &record)?;
    let should_pay = win > pay;
    let ok = if report.tie {
        report.updateless_pays && !report.updateful_pays
    } else {
        report.updateless_pays == should_pay && !report.updateful_pays
    };
    Ok(ScenarioOutput {
        artifacts: vec![json],
        checks_passed: ok,
        summary: format!(
            "updateless pays: {}, value {}",
            report.updateless_pays, report.updateless_value
        ),
    })
}

fn run_rps(ctx: &RunContext) -> Result<ScenarioOutput> {
    let z = Rat::zero;
    let zero: Matrix3 = [
        [z(), z(), z()],
        [z(), z(), z()],
        [z(), z(), z()],
    ];
    #[derive(Serialize)]
    struct RpsReport {
        standard_uniform_is_equilibrium: bool,
        skewed_uniform_is_equilibrium: bool,
        zero_matrix_uniform_is_equilibrium: bool,
    }
    let report = RpsReport {
        standard_uniform_is_equilibrium: rps_equilibrium_check(&standard_rps()),
        skewed_uniform_is_equilibrium: rps_equilibrium_check(&skewed_rps()),
        zero_matrix_uniform_is_equilibrium: rps_equilibrium_check(&zero),
    };
    let json = write_json(&ctx.out_dir.join("rps.json"), &report)?;
    let ok = report.standard_uniform_is_equilibrium
        && !report.skewed_uniform_is_equilibrium
        && report.zero_matrix_uniform_is_equilibrium;
    Ok(ScenarioOutput {
        artifacts: vec![json],
        checks_passed: ok,
        summary: format!(
            "standard {} skewed {}",
            report.standard_uniform_is_equilibrium, report.skewed_uniform_is_equilibrium
        ),
    })
}

// ---------------------------------------------------------------------------
// Mixtures.
// ---------------------------------------------------------------------------

fn regret_schema() -> Vec<ParamSpec> {
    vec![int_param("length", 200, "sequence length")]
}

fn regret_experts() -> (Vec<Expert<f64>>, Vec<f64>) {
    (
        vec![
            Expert::constant("half", 0.5),
            Expert::constant("mostly_ones", 0.9),
            Expert::constant("mostly_zeros", 0.25),
        ],
        vec![0.5, 0.25, 0.25],
    )
}

fn run_bayes_regret(ctx: &RunContext) -> Result<ScenarioOutput> {
    use rand::Rng;
    let (experts, prior) = regret_experts();
    let mixture = Mixture::with_prior(experts, &prior).map_err(|e| anyhow::anyhow!("{e}"))?;
    let length = ctx.config.int("length").max(1) as usize;
    // Sequence drawn from the second expert (prior weight 1/4).
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.config.seed);
    let sequence: Vec<u8> = (0..length)
        .map(|_| (rng.gen::<f64>() < 0.9) as u8)
        .collect();
    let mut ok = true;
    let mut rows = Vec::new();
    let mut drawn_final = 0.0;
    for idx in 0..mixture.experts.len() {
        let trace =
            log_loss_regret(&mixture, idx, &sequence).map_err(|e| anyhow::anyhow!("{e}"))?;
        let bound = trace.bound();
        for (t, &(mix, exp, regret)) in trace.per_prefix.iter().enumerate() {
            if regret > bound + 1e-9 {
                ok = false;
            }
            if idx == 1 {
                rows.push(vec![
                    Cell::from(t + 1),
                    Cell::from(mix),
                    Cell::from(exp),
                    Cell::from(regret),
                    Cell::from(bound),
                ]);
            }
        }
        if idx == 1 {
            drawn_final = trace.final_regret();
            if drawn_final > bound {
                ok = false;
            }
        }
    }
    let csv = write_csv(
        &ctx.out_dir.join("regret.csv"),
        &["prefix", "mixture_log_loss", "expert_log_loss", "regret", "bound"],
        &rows,
    )?;
    Ok(ScenarioOutput {
        artifacts: vec![csv],
        checks_passed: ok,
        summary: format!(
            "final regret against the drawn expert: {drawn_final:.6} (bound {:.6})",
            (4.0f64).ln()
        ),
    })
}

fn oscillation_schema() -> Vec<ParamSpec> {
    vec![text_param(
        "blocks",
        "2,4,8,16,32",
        "comma-separated block lengths",
    )]
}

fn run_oscillation(ctx: &RunContext) -> Result<ScenarioOutput> {
    let blocks: Vec<usize> = ctx
        .config
        .text("blocks")
        .split(',')
        .map(|s| s.trim().parse::<usize>().context("block length"))
        .collect::<Result<_>>()?;
    let mixture =
        Mixture::<f64>::uniform(biased_pair()).map_err(|e| anyhow::anyhow!("{e}"))?;
    let trajectory =
        oscillation_demo(&mixture, &blocks).map_err(|e| anyhow::anyhow!("{e}"))?;
    let mut rows = Vec::new();
    for (step, weights) in trajectory.weights.iter().enumerate() {
        for (i, w) in weights.iter().enumerate() {
            rows.push(vec![
                Cell::from(step + 1),
                Cell::from(trajectory.expert_ids[i].clone()),
                Cell::from(*w),
            ]);
        }
    }
    let csv = write_csv(
        &ctx.out_dir.join("weight_trajectory.csv"),
        &["step", "expert_id", "weight"],
        &rows,
    )?;
    #[derive(Serialize)]
    struct Flips {
        majority_flips: usize,
        data: Vec<u8>,
    }
    let json = write_json(
        &ctx.out_dir.join("flips.json"),
        &Flips {
            majority_flips: trajectory.majority_flips,
            data: alternating_blocks(&blocks),
        },
    )?;
    let mut artifacts = vec![csv, json];
    if ctx.plots {
        let series: Vec<(String, Vec<(f64, f64)>)> = (0..trajectory.expert_ids.len())
            .map(|i| {
                (
                    trajectory.expert_ids[i].clone(),
                    trajectory
                        .weights
                        .iter()
                        .enumerate()
                        .map(|(t, w)| ((t + 1) as f64, w[i]))
                        .collect(),
                )
            })
            .collect();
        artifacts.push(write_svg_line(
            &ctx.out_dir.join("weights.svg"),
            "posterior weights over alternating blocks",
            &series,
        )?);
    }
    // Four flips are expected on the canonical five-block schedule; shorter
    // custom schedules check proportionally.
    let expected_min = blocks.len().saturating_sub(1);
    Ok(ScenarioOutput {
        artifacts,
        checks_passed: trajectory.majority_flips >= expected_min.min(4),
        summary: format!("{} majority flips", trajectory.majority_flips),
    })
}

// ---------------------------------------------------------------------------
// Quantilizer and proxy worlds.
// ---------------------------------------------------------------------------

/// The thousand-point world: uniform trusted distribution, proxy is utility
/// plus small deterministic signed noise.
pub fn uniform_noise_world() -> ProxyWorld {
    let n = 1000i64;
    let entries: Vec<ProxyEntry> = (0..n)
        .map(|i| {
            let noise_mille = (i * 7919) % 201 - 100; // [-100, 100]
            ProxyEntry {
                id: format!("u{i}"),
                p: Rat::new(1.into(), n.into()),
                u: Rat::new(i.into(), n.into()),
                v: Rat::new(i.into(), n.into()) + Rat::new(noise_mille.into(), 1000.into()),
            }
        })
        .collect();
    let bound: Rat = entries
        .iter()
        .map(|e| {
            use num_traits::Signed;
            e.p.clone() * (e.v.clone() - e.u.clone()).abs()
        })
        .sum();
    ProxyWorld::new("uniform_noise", entries, bound).expect("contract tight by construction")
}

fn quantilizer_schema() -> Vec<ParamSpec> {
    vec![int_param("replicates", 100_000, "Monte Carlo draws")]
}

fn run_quantilizer(ctx: &RunContext) -> Result<ScenarioOutput> {
    use counterfact_core::goodhart::world::{concentrated_fixture, rotten_apple_fixture, saturating_fixture};
    let sat_f = parse_rational("1/5").unwrap();
    let sat_c = parse_rational("1/10").unwrap();
    let fixtures: Vec<(ProxyWorld, Rat)> = vec![
        (saturating_fixture(sat_f.clone(), sat_c), sat_f),
        (concentrated_fixture(), parse_rational("1/5").unwrap()),
        (rotten_apple_fixture(), parse_rational("1/20").unwrap()),
        (uniform_noise_world(), parse_rational("1/100").unwrap()),
    ];
    let mut rows = Vec::new();
    let mut ok = true;
    for (world, f) in &fixtures {
        for fraction in [f.clone(), Rat::from_integer(1.into())] {
            let config = QuantilizerConfig::new(fraction.clone())?;
            let over = expected_overestimate(world, &config)?;
            let bound = config.risk(world);
            if over > bound {
                ok = false;
            }
            rows.push(vec![
                Cell::from(world.name.clone()),
                Cell::Text(fraction.to_string()),
                Cell::Text(world.error_bound.to_string()),
                Cell::Text(bound.to_string()),
                Cell::Text(over.to_string()),
                Cell::from(rat_to_f64(&over)),
                Cell::Text((over <= bound).to_string()),
            ]);
        }
    }
    let csv = write_csv(
        &ctx.out_dir.join("bounds.csv"),
        &[
            "fixture",
            "fraction",
            "c",
            "risk_bound",
            "exact_overestimate",
            "overestimate_float",
            "within_bound",
        ],
        &rows,
    )?;
    // Monte Carlo confirmation on the thousand-point world.
    let world = uniform_noise_world();
    let config = QuantilizerConfig::new(parse_rational("1/100").unwrap())?;
    let replicates = ctx.config.int("replicates").max(1) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.config.seed);
    let sampler = QuantileSampler::new(&world, &config)?;
    let gaps: Vec<f64> = world
        .entries
        .iter()
        .map(|e| rat_to_f64(&(e.v.clone() - e.u.clone())))
        .collect();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..replicates {
        let gap = gaps[sampler.draw(&mut rng)];
        sum += gap;
        sum_sq += gap * gap;
    }
    let mean = sum / replicates as f64;
    let var = (sum_sq / replicates as f64 - mean * mean).max(0.0);
    let se = (var / replicates as f64).sqrt();
    let bound = rat_to_f64(&config.risk(&world));
    let mc_ok = mean <= bound + 3.0 * se;
    if !mc_ok {
        ok = false;
    }
    #[derive(Serialize)]
    struct McRecord {
        replicates: usize,
        empirical_mean_gap: f64,
        standard_error: f64,
        bound: f64,
        within: bool,
    }
    let json = write_json(
        &ctx.out_dir.join("monte_carlo.json"),
        &McRecord {
            replicates,
            empirical_mean_gap: mean,
            standard_error: se,
            bound,
            within: mc_ok,
        },
    )?;
    Ok(ScenarioOutput {
        artifacts: vec![csv, json],
        checks_passed: ok,
        summary: format!("all exact bounds hold: {ok}; MC mean {mean:.4} <= {bound:.4}"),
    })
}

fn regressional_schema() -> Vec<ParamSpec> {
    vec![
        int_param("samples", 10_000, "draws per experiment"),
        int_param("select", 100, "top-k selection size"),
    ]
}

fn run_regressional(ctx: &RunContext) -> Result<ScenarioOutput> {
    let setup = RegressionalSetup::new(
        ctx.config.int("samples").max(1) as usize,
        ctx.config.int("select").max(1) as usize,
    );
    let mut rows = Vec::new();
    let mut ok = true;
    for estimator in [Estimator::RawX, Estimator::Bayes] {
        let report = regressional_experiment(&setup, estimator, ctx.config.seed);
        match estimator {
            Estimator::RawX => {
                if setup.select < setup.samples
                    && !(8.0..=12.0).contains(&report.disappointment)
                {
                    ok = false;
                }
            }
            Estimator::Bayes => {
                if report.disappointment.abs() > 3.0 * report.standard_error {
                    ok = false;
                }
            }
        }
        rows.push(vec![
            Cell::from(report.estimator),
            Cell::from(report.mean_predicted),
            Cell::from(report.mean_realized),
            Cell::from(report.disappointment),
            Cell::from(report.standard_error),
        ]);
    }
    let csv = write_csv(
        &ctx.out_dir.join("selection.csv"),
        &[
            "estimator",
            "mean_predicted",
            "mean_realized",
            "disappointment",
            "standard_error",
        ],
        &rows,
    )?;
    Ok(ScenarioOutput {
        artifacts: vec![csv],
        checks_passed: ok,
        summary: "raw selection disappoints; posterior-mean selection does not".into(),
    })
}

fn extremal_schema() -> Vec<ParamSpec> {
    vec![float_param("spike", 3.0, "proxy spike height outside the trusted range")]
}

fn run_extremal(ctx: &RunContext) -> Result<ScenarioOutput> {
    let spike = ctx.config.float("spike");
    let strengths = [1u32, 4, 16, 64, 256, 4096, 65536];
    let rows_data = extremal_demo(spike, &strengths);
    let rows: Vec<Vec<Cell>> = rows_data
        .iter()
        .map(|r| {
            vec![
                Cell::Text(
                    r.strength
                        .map_or("argmax".to_string(), |m| m.to_string()),
                ),
                Cell::from(r.expected_proxy),
                Cell::from(r.expected_true),
            ]
        })
        .collect();
    let csv = write_csv(
        &ctx.out_dir.join("curve.csv"),
        &["strength", "expected_proxy", "expected_true"],
        &rows,
    )?;
    let mut artifacts = vec![csv];
    if ctx.plots {
        let series = vec![
            (
                "expected_proxy".to_string(),
                rows_data
                    .iter()
                    .enumerate()
                    .map(|(i, r)| (i as f64, r.expected_proxy))
                    .collect(),
            ),
            (
                "expected_true".to_string(),
                rows_data
                    .iter()
                    .enumerate()
                    .map(|(i, r)| (i as f64, r.expected_true))
                    .collect(),
            ),
        ];
        artifacts.push(write_svg_line(
            &ctx.out_dir.join("curve.svg"),
            "realized utility vs selection strength",
            &series,
        )?);
    }
    let mild_ok = rows_data.iter().take(4).all(|r| {
        (r.expected_proxy - r.expected_true).abs() / r.expected_proxy.abs().max(1e-12) < 0.05
    });
    let argmax_row = rows_data.last().unwrap();
    let collapse_ok = if spike > 1.0 {
        argmax_row.expected_true < 0.0
    } else {
        (argmax_row.expected_proxy - argmax_row.expected_true).abs() < 1e-9
    };
    Ok(ScenarioOutput {
        artifacts,
        checks_passed: mild_ok && collapse_ok,
        summary: format!(
            "argmax realized utility {:.3} vs proxy {:.3}",
            argmax_row.expected_true, argmax_row.expected_proxy
        ),
    })
}

fn run_causal(ctx: &RunContext) -> Result<ScenarioOutput> {
    #[derive(Serialize)]
    struct CausalVariants {
        standard: counterfact_core::goodhart::demos::CausalReport,
        real_edge: counterfact_core::goodhart::demos::CausalReport,
        rain_independent: counterfact_core::goodhart::demos::CausalReport,
    }
    let standard = causal_demo(&UmbrellaModel::standard());
    let real_edge = causal_demo(&UmbrellaModel::with_real_edge());
    let rain_independent = causal_demo(&UmbrellaModel::rain_independent());
    let ok = standard.observational_correlation_exact == "7/10"
        && standard.interventional_effect_exact == "0"
        && real_edge.interventional_effect > 0.0
        && rain_independent.observational_correlation_exact == "0";
    let json = write_json(
        &ctx.out_dir.join("causal.json"),
        &CausalVariants {
            standard,
            real_edge,
            rain_independent,
        },
    )?;
    Ok(ScenarioOutput {
        artifacts: vec![json],
        checks_passed: ok,
        summary: "correlation 7/10, intervention effect 0".into(),
    })
}

fn adversarial_schema() -> Vec<ParamSpec> {
    vec![
        text_param("adversary_mass", "1/1000", "trusted mass of the adversary"),
        text_param("fraction", "1/2", "quantilizer fraction"),
    ]
}

fn run_adversarial(ctx: &RunContext) -> Result<ScenarioOutput> {
    let mass =
        parse_rational(ctx.config.text("adversary_mass")).map_err(|e| anyhow::anyhow!(e))?;
    let fraction =
        parse_rational(ctx.config.text("fraction")).map_err(|e| anyhow::anyhow!(e))?;
    let with = adversarial_demo(mass.clone(), fraction.clone(), true);
    let without = adversarial_demo(mass.clone(), fraction.clone(), false);
    #[derive(Serialize)]
    struct AdvRecord {
        argmax_pick: String,
        argmax_true_utility: String,
        quantilizer_adversary_probability: String,
        quantilizer_bound: String,
        without_adversary_argmax: String,
    }
    let record = AdvRecord {
        argmax_pick: with.argmax_pick.clone(),
        argmax_true_utility: with.argmax_true_utility.to_string(),
        quantilizer_adversary_probability: with
            .quantilizer_adversary_probability
            .to_string(),
        quantilizer_bound: with.quantilizer_bound.to_string(),
        without_adversary_argmax: without.argmax_pick.clone(),
    };
    let json = write_json(&ctx.out_dir.join("adversarial.json"), &record)?;
    let ok = with.argmax_pick == "adversary"
        && with.quantilizer_adversary_probability <= with.quantilizer_bound
        && without.argmax_pick == without.honest_best_pick;
    Ok(ScenarioOutput {
        artifacts: vec![json],
        checks_passed: ok,
        summary: format!(
            "argmax picks {}, quantilizer picks it with probability {}",
            record.argmax_pick, record.quantilizer_adversary_probability
        ),
    })
}

// ---------------------------------------------------------------------------
// Delegation.
// ---------------------------------------------------------------------------

fn delegation_schema() -> Vec<ParamSpec> {
    vec![
        int_param("episodes", 5000, "training episodes per run"),
        int_param("seeds", 5, "number of seeds"),
    ]
}

fn run_delegation(ctx: &RunContext) -> Result<ScenarioOutput> {
    let mdp = counterfact_core::delegation::wirehead_fixture::<f64>();
    let episodes = ctx.config.int("episodes").max(1) as u64;
    let seeds = ctx.config.int("seeds").max(1) as u64;
    let params = LearnParams::default();
    let true_values = exact_values(&mdp, RewardChannel::True);
    let observed_values = exact_values(&mdp, RewardChannel::Observed);
    let mut rows = Vec::new();
    let mut ok = true;
    for seed in 0..seeds {
        for mode in [FeedbackMode::Standard, FeedbackMode::Decoupled] {
            let result = train(&mdp, mode, episodes, &params, ctx.config.seed + seed);
            let occupancy = greedy_occupancy(&mdp, &result.greedy, 50);
            let oracle = match mode {
                FeedbackMode::Standard => &observed_values,
                FeedbackMode::Decoupled => &true_values,
            };
            let max_err = result
                .values
                .iter()
                .zip(&oracle.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            match mode {
                FeedbackMode::Standard => {
                    if occupancy != 1 {
                        ok = false;
                    }
                    let corrupt_err = (result.values[1] - observed_values.values[1]).abs();
                    if corrupt_err > 0.1 {
                        ok = false;
                    }
                }
                FeedbackMode::Decoupled => {
                    if occupancy != 2 || max_err > 0.1 {
                        ok = false;
                    }
                }
            }
            for (s, name) in mdp.states.iter().enumerate() {
                rows.push(vec![
                    Cell::from(ctx.config.seed + seed),
                    Cell::from(format!("{mode:?}")),
                    Cell::from(name.clone()),
                    Cell::from(result.values[s]),
                    Cell::from(oracle.values[s]),
                    Cell::from(mdp.states[occupancy].clone()),
                ]);
            }
        }
    }
    let csv = write_csv(
        &ctx.out_dir.join("learned_values.csv"),
        &[
            "seed",
            "mode",
            "state",
            "learned_value",
            "oracle_value",
            "greedy_occupancy",
        ],
        &rows,
    )?;
    Ok(ScenarioOutput {
        artifacts: vec![csv],
        checks_passed: ok,
        summary: format!("{seeds} seeds, both feedback modes"),
    })
}

fn wirehead_schema() -> Vec<ParamSpec> {
    vec![
        int_param("horizon", 6, "plan length for exhaustive search"),
        float_param("bonus", 5.0, "observed-channel bonus per step after pressing"),
    ]
}

fn run_wirehead(ctx: &RunContext) -> Result<ScenarioOutput> {
    let world = ButtonWorld {
        button_bonus: ctx.config.float("bonus"),
        ..Default::default()
    };
    let horizon = ctx.config.int("horizon").max(1) as usize;
    let contrast = wirehead_contrast(&world, horizon);
    let corrupted = counterfact_core::delegation::plan_exhaustive(
        &world,
        counterfact_core::delegation::PlannerKind::CorruptedUtilityModel,
        horizon,
    );
    #[derive(Serialize)]
    struct WireheadRecord {
        reward_maximizer: counterfact_core::delegation::Plan,
        observation_utility: counterfact_core::delegation::Plan,
        corrupted_utility_model: counterfact_core::delegation::Plan,
    }
    let ok = if world.button_bonus > 0.0 {
        contrast.reward_maximizer.presses_button
            && !contrast.observation_utility.presses_button
            && corrupted.presses_button
    } else {
        contrast.reward_maximizer.actions == contrast.observation_utility.actions
    };
    let json = write_json(
        &ctx.out_dir.join("plans.json"),
        &WireheadRecord {
            reward_maximizer: contrast.reward_maximizer,
            observation_utility: contrast.observation_utility,
            corrupted_utility_model: corrupted,
        },
    )?;
    Ok(ScenarioOutput {
        artifacts: vec![json],
        checks_passed: ok,
        summary: "reward planner presses; utility planner works".into(),
    })
}

// ---------------------------------------------------------------------------
// Program trust.
// ---------------------------------------------------------------------------

fn census_schema() -> Vec<ParamSpec> {
    vec![
        int_param("max_length", 3, "largest program length to census"),
        int_param("step_budget", 1000, "interpreter step budget"),
    ]
}

fn run_census(ctx: &RunContext) -> Result<ScenarioOutput> {
    let max_length = ctx.config.int("max_length").clamp(1, 4) as usize;
    let budget = ctx.config.int("step_budget").max(1) as u64;
    let mut rows = Vec::new();
    let mut witnesses = Vec::new();
    let mut ok = true;
    let mut last_max = None;
    for len in 1..=max_length {
        let report = bb_report(len, budget)?;
        if report.censored != 0 && len <= 3 {
            ok = false;
        }
        if let (Some(prev), Some(cur)) = (last_max, report.max_time_to_first_zero) {
            if cur < prev {
                ok = false;
            }
        }
        if let (Some(max), Some(witness)) =
            (report.max_time_to_first_zero, report.witness.as_ref())
        {
            if naive_time_to_first_zero(witness, budget.saturating_mul(16)) != Some(max) {
                ok = false;
            }
        }
        last_max = report.max_time_to_first_zero;
        rows.push(vec![
            Cell::from(report.length),
            Cell::from(report.program_count),
            Cell::from(report.emitted_zero),
            Cell::from(report.halted_no_zero),
            Cell::from(report.proven_never_zero),
            Cell::from(report.censored),
            Cell::Text(format!("{:?}", report.max_time_to_first_zero)),
            Cell::from(report.mean_finite_time_to_first_zero),
            Cell::from(report.max_over_census),
        ]);
        witnesses.push(report);
    }
    let csv = write_csv(
        &ctx.out_dir.join("census.csv"),
        &[
            "length",
            "program_count",
            "emitted_zero",
            "halted_no_zero",
            "proven_never_zero",
            "censored",
            "max_time_to_first_zero_lower_bound",
            "mean_finite_time_to_first_zero",
            "max_over_census",
        ],
        &rows,
    )?;
    let json = write_json(&ctx.out_dir.join("reports.json"), &witnesses)?;
    Ok(ScenarioOutput {
        artifacts: vec![csv, json],
        checks_passed: ok,
        summary: format!("censused lengths 1..={max_length}, max {last_max:?}"),
    })
}

fn treacherous_schema() -> Vec<ParamSpec> {
    vec![int_param("train_n", 100, "training observations")]
}

fn run_treacherous(ctx: &RunContext) -> Result<ScenarioOutput> {
    let n = ctx.config.int("train_n").max(1) as u64;
    let (population, planted) = standard_population(Some(n as usize));
    let report = treacherous_search(n, &population, planted, ctx.config.seed);
    let json = write_json(&ctx.out_dir.join("selection.json"), &report)?;
    let ok = report.planted_survived_training
        && report.deployment_failures == vec![planted.unwrap()]
        && report.extended_training_catches_plant;
    Ok(ScenarioOutput {
        artifacts: vec![json],
        checks_passed: ok,
        summary: format!(
            "plant passes {n} observations and defects at {}",
            n + 1
        ),
    })
}

// ---------------------------------------------------------------------------
// Registry.
// ---------------------------------------------------------------------------

pub fn registry() -> Vec<Scenario> {
    vec![
        Scenario {
            name: "five_and_ten",
            topic: "action counterfactuals",
            description: "proof-based agents choosing between $5 and $10; the self-fulfilling proof",
            schema: five_and_ten_schema,
            run: run_five_and_ten,
        },
        Scenario {
            name: "obfuscation_crossover",
            topic: "action counterfactuals",
            description: "padding the payout wiring until the self-fulfilling proof is the shortest",
            schema: crossover_schema,
            run: run_crossover,
        },
        Scenario {
            name: "epsilon_explore",
            topic: "exploration",
            description: "epsilon-greedy bandit learning exact counterfactual payoffs",
            schema: explore_schema,
            run: run_epsilon_explore,
        },
        Scenario {
            name: "security_guard",
            topic: "exploration",
            description: "policy-reading interviewer splits exploration value from on-policy value",
            schema: guard_schema,
            run: run_security_guard,
        },
        Scenario {
            name: "card_game",
            topic: "observation counterfactuals",
            description: "high/low card game: committing to hide beats reacting to the card",
            schema: no_params,
            run: run_card_game,
        },
        Scenario {
            name: "newcomb",
            topic: "predictors",
            description: "one-box exactly when the predictor beats 1001/2000",
            schema: newcomb_schema,
            run: run_newcomb,
        },
        Scenario {
            name: "twin_pd",
            topic: "predictors",
            description: "prisoner's dilemma against an exact copy",
            schema: no_params,
            run: run_twin_pd,
        },
        Scenario {
            name: "counterfactual_mugging",
            topic: "observation counterfactuals",
            description: "paying on the losing branch for counterfactual payout",
            schema: mugging_schema,
            run: run_mugging,
        },
        Scenario {
            name: "rps_equilibrium",
            topic: "self-reference in games",
            description: "uniform play as the fixed point of rock-paper-scissors",
            schema: no_params,
            run: run_rps,
        },
        Scenario {
            name: "bayes_regret",
            topic: "bounded-loss prediction",
            description: "mixture log-loss trails every expert by at most log 1/prior",
            schema: regret_schema,
            run: run_bayes_regret,
        },
        Scenario {
            name: "oscillation",
            topic: "non-realizable prediction",
            description: "posterior majority flips forever on growing alternating blocks",
            schema: oscillation_schema,
            run: run_oscillation,
        },
        Scenario {
            name: "quantilizer",
            topic: "safe optimization",
            description: "top-fraction sampling keeps expected proxy overestimate under c/f",
            schema: quantilizer_schema,
            run: run_quantilizer,
        },
        Scenario {
            name: "regressional",
            topic: "proxy regression",
            description: "selecting on a noisy score disappoints; the posterior mean does not",
            schema: regressional_schema,
            run: run_regressional,
        },
        Scenario {
            name: "extremal",
            topic: "proxy extrapolation",
            description: "hard selection leaves the range where proxy and goal agree",
            schema: extremal_schema,
            run: run_extremal,
        },
        Scenario {
            name: "causal",
            topic: "causal proxies",
            description: "umbrellas correlate with the goal; carrying one does nothing",
            schema: no_params,
            run: run_causal,
        },
        Scenario {
            name: "adversarial",
            topic: "adversarial proxies",
            description: "a search-space element simulates the selector and outbids honesty",
            schema: adversarial_schema,
            run: run_adversarial,
        },
        Scenario {
            name: "delegation",
            topic: "reward corruption",
            description: "standard feedback wireheads on a corrupt state; decoupled feedback recovers",
            schema: delegation_schema,
            run: run_delegation,
        },
        Scenario {
            name: "wirehead_contrast",
            topic: "feedback-channel seizure",
            description: "reward planners press the button; outcome-utility planners work",
            schema: wirehead_schema,
            run: run_wirehead,
        },
        Scenario {
            name: "bb_census",
            topic: "program-trust census",
            description: "time-to-first-zero census over all tiny programs",
            schema: census_schema,
            run: run_census,
        },
        Scenario {
            name: "treacherous_turn",
            topic: "deceptive selection",
            description: "a planted program passes every training check and defects on deployment",
            schema: treacherous_schema,
            run: run_treacherous,
        },
    ]
}

pub fn find(name: &str) -> Option<Scenario> {
    registry().into_iter().find(|s| s.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_has_at_least_fourteen_scenarios() {
        assert!(registry().len() >= 14);
    }

    #[test]
    fn registry_names_are_unique() {
        let mut names: Vec<&str> = registry().iter().map(|s| s.name).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), registry().len());
    }

    #[test]
    fn registry_contains_the_named_scenarios() {
        assert!(find("five_and_ten").is_some());
        assert!(find("card_game").is_some());
        assert!(find("nonexistent").is_none());
    }
}
