//! The five-and-ten scenario: proof-based agents choosing between a $5 and
//! a $10 bill in a universe that pays out whatever the agent takes.
//!
//! The agent and the universe know each other's source; self-reference is
//! modeled by reading the box as "provable in the agent's own search
//! system". An agent that acts on any discovered proof of "taking 5 pays x
//! and taking 10 pays y" supplies the fixed-point hook that makes the
//! self-fulfilling proof go through.

use serde::{Deserialize, Serialize};

use crate::modal::formula::Formula;
use crate::modal::proof_check::check_proof;
use crate::modal::proofs::{enumerate_proofs, AxiomSet, Proof, ProofSearchError};
use crate::modal::tableau::{gl_valid, BudgetExceeded, Validity};

/// Payout levels the scenario talks about.
pub const UTILITY_LEVELS: [u8; 3] = [0, 5, 10];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AgentVariant {
    /// Searches for any pair (x, y) with x > y; takes 5 on success, 10 by
    /// default.
    AsymmetricDefault10,
    /// Compares the shortest discovered proof across all pairs and acts on
    /// the best-payoff statement found.
    ShortestProofFirst,
    /// Takes the other action whenever its own action is provable.
    ChickenRule,
}

impl AgentVariant {
    pub fn name(self) -> &'static str {
        match self {
            AgentVariant::AsymmetricDefault10 => "asymmetric_default_10",
            AgentVariant::ShortestProofFirst => "shortest_proof_first",
            AgentVariant::ChickenRule => "chicken_rule",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProofAgentConfig {
    pub variant: AgentVariant,
    /// Maximum proof length the agent will accept.
    pub proof_budget: usize,
}

impl ProofAgentConfig {
    pub fn new(variant: AgentVariant) -> Self {
        ProofAgentConfig {
            variant,
            proof_budget: DEFAULT_PROOF_BUDGET,
        }
    }
}

pub const DEFAULT_PROOF_BUDGET: usize = 80;

/// The world: action atoms, utility atoms, and the axiom set describing the
/// universe's payout wiring, with optional obfuscation padding on the
/// ten-dollar branch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiveTenWorld {
    pub padding: usize,
}

impl FiveTenWorld {
    pub fn new() -> Self {
        FiveTenWorld { padding: 0 }
    }

    pub fn a5() -> Formula {
        Formula::atom("a5")
    }

    pub fn a10() -> Formula {
        Formula::atom("a10")
    }

    pub fn utility(u: u8) -> Formula {
        Formula::atom(format!("u{u}"))
    }

    /// The statement "taking 5 pays x and taking 10 pays y".
    pub fn pair_statement(x: u8, y: u8) -> Formula {
        Formula::and(
            Formula::implies(Self::a5(), Self::utility(x)),
            Formula::implies(Self::a10(), Self::utility(y)),
        )
    }

    /// The self-fulfilling proposition: "if the agent outputs 5 the universe
    /// outputs 5, and if the agent outputs 10 the universe outputs 0".
    pub fn spurious_statement() -> Formula {
        Self::pair_statement(5, 0)
    }

    /// Universe axioms: the two payout implications, with the ten-branch
    /// optionally stretched into a provably equivalent implication chain
    /// `a10 -> t1, t1 -> t2, ..., tk -> u10`.
    fn universe_axioms(&self) -> Vec<Formula> {
        let mut out = Vec::new();
        out.push(Formula::implies(Self::a5(), Self::utility(5)));
        if self.padding == 0 {
            out.push(Formula::implies(Self::a10(), Self::utility(10)));
        } else {
            let link = |i: usize| Formula::atom(format!("t{i}"));
            out.push(Formula::implies(Self::a10(), link(1)));
            for i in 1..self.padding {
                out.push(Formula::implies(link(i), link(i + 1)));
            }
            out.push(Formula::implies(link(self.padding), Self::utility(10)));
        }
        out
    }

    /// Exactly one action is taken and at most one utility level holds.
    fn uniqueness_axioms(&self) -> Vec<Formula> {
        let mut out = vec![
            Formula::neg(Formula::and(Self::a5(), Self::a10())),
            Formula::or(Self::a5(), Self::a10()),
        ];
        for (i, &u) in UTILITY_LEVELS.iter().enumerate() {
            for &v in &UTILITY_LEVELS[i + 1..] {
                out.push(Formula::neg(Formula::and(
                    Self::utility(u),
                    Self::utility(v),
                )));
            }
        }
        out
    }
}

impl Default for FiveTenWorld {
    fn default() -> Self {
        Self::new()
    }
}

/// Replace the universe's payout wiring with provably equivalent chains of
/// the given length.
pub fn obfuscate_universe(padding: usize) -> FiveTenWorld {
    FiveTenWorld { padding }
}

/// The agent-code axiom for acting on a discovered proof of `statement`:
/// provability of the statement drives the stated action.
fn code_axiom(statement: &Formula, action5: bool) -> Formula {
    let act = if action5 {
        FiveTenWorld::a5()
    } else {
        FiveTenWorld::a10()
    };
    Formula::implies(Formula::boxed(statement.clone()), act)
}

/// Universe + uniqueness axioms plus the variant's agent-code axioms.
///
/// World-description axioms are global: they are known to the proof system
/// and so provable, provably provable, and so on. The chicken-rule axioms
/// are local: they describe the agent's bounded self-proof check, and
/// letting the box absorb them would collapse the axiom set into
/// inconsistency (a terminal world would have to take both actions).
pub fn build_axioms(world: &FiveTenWorld, config: &ProofAgentConfig) -> AxiomSet {
    let mut set = AxiomSet::empty();
    for f in world.universe_axioms() {
        set.push_global(f);
    }
    for f in world.uniqueness_axioms() {
        set.push_global(f);
    }
    match config.variant {
        AgentVariant::AsymmetricDefault10 => {
            set.push_global(code_axiom(&FiveTenWorld::spurious_statement(), true));
        }
        AgentVariant::ShortestProofFirst => {
            // Agent logic lives in the search loop; per-pair code axioms are
            // supplied there.
        }
        AgentVariant::ChickenRule => {
            set.push_local(Formula::implies(
                Formula::boxed(FiveTenWorld::a5()),
                FiveTenWorld::a10(),
            ));
            set.push_local(Formula::implies(
                Formula::boxed(FiveTenWorld::a10()),
                FiveTenWorld::a5(),
            ));
        }
    }
    set
}

/// The consistency check: the boxed negation of the axiom conjunction must
/// not be valid (equivalently, the axioms are jointly satisfiable at some
/// world of some model).
pub fn axioms_consistent(set: &AxiomSet) -> Result<bool, BudgetExceeded> {
    let conj = Formula::conj(&set.formulas().cloned().collect::<Vec<_>>());
    Ok(match gl_valid(&Formula::boxed(Formula::neg(conj)))? {
        Validity::Valid => false,
        Validity::Invalid { .. } => true,
    })
}

/// One searched pair in an agent run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchedTarget {
    pub x: u8,
    pub y: u8,
    pub statement: String,
    pub proof_len: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentTrace {
    pub variant: AgentVariant,
    /// 5 or 10; absent when the budget ran out before any decision.
    pub action: Option<u8>,
    pub proof: Option<Proof>,
    pub searched_targets: Vec<SearchedTarget>,
    pub budget: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AgentError {
    #[error(transparent)]
    Search(#[from] ProofSearchError),
    #[error("found proof failed independent verification: {0}")]
    UnsoundProof(String),
}

fn verified(axioms: &AxiomSet, proof: Proof) -> Result<Proof, AgentError> {
    check_proof(axioms, &proof).map_err(|e| AgentError::UnsoundProof(e.to_string()))?;
    Ok(proof)
}

/// All ordered pairs (x, y) of utility levels.
fn all_pairs() -> Vec<(u8, u8)> {
    let mut out = Vec::new();
    for &x in &UTILITY_LEVELS {
        for &y in &UTILITY_LEVELS {
            out.push((x, y));
        }
    }
    out
}

/// Run a proof-based agent on the world and report its decision trace.
pub fn run_proof_agent(
    world: &FiveTenWorld,
    config: &ProofAgentConfig,
) -> Result<AgentTrace, AgentError> {
    let axioms = build_axioms(world, config);
    let budget = config.proof_budget;
    match config.variant {
        AgentVariant::AsymmetricDefault10 | AgentVariant::ChickenRule => {
            // Search the pair statements against the fixed axiom set; take 5
            // exactly when some x > y statement is provable.
            let mut searched = Vec::new();
            let mut decision: Option<(u8, Proof)> = None;
            for (x, y) in all_pairs() {
                let statement = FiveTenWorld::pair_statement(x, y);
                let proof = enumerate_proofs(&axioms, &statement, budget)?;
                searched.push(SearchedTarget {
                    x,
                    y,
                    statement: statement.to_string(),
                    proof_len: proof.as_ref().map(Proof::len),
                });
                if decision.is_none() && x > y {
                    if let Some(p) = proof {
                        decision = Some((5, verified(&axioms, p)?));
                    }
                }
            }
            let (action, proof) = match decision {
                Some((a, p)) => (Some(a), Some(p)),
                None => (Some(10), None),
            };
            Ok(AgentTrace {
                variant: config.variant,
                action,
                proof,
                searched_targets: searched,
                budget,
            })
        }
        AgentVariant::ShortestProofFirst => {
            // For each pair, the agent's own code supplies the hook "if this
            // statement is provable I act on it"; the pair with the shortest
            // proof wins, ties preferring the default ten-dollar action.
            let mut searched = Vec::new();
            let mut best: Option<(usize, u8, Proof)> = None;
            for (x, y) in all_pairs() {
                let statement = FiveTenWorld::pair_statement(x, y);
                let action5 = x > y;
                let mut pair_axioms = axioms.clone();
                pair_axioms.push_global(code_axiom(&statement, action5));
                let proof = enumerate_proofs(&pair_axioms, &statement, budget)?;
                searched.push(SearchedTarget {
                    x,
                    y,
                    statement: statement.to_string(),
                    proof_len: proof.as_ref().map(Proof::len),
                });
                if let Some(p) = proof {
                    let p = verified(&pair_axioms, p)?;
                    let action = if action5 { 5 } else { 10 };
                    let better = match &best {
                        None => true,
                        Some((len, act, _)) => {
                            p.len() < *len || (p.len() == *len && *act == 5 && action == 10)
                        }
                    };
                    if better {
                        best = Some((p.len(), action, p));
                    }
                }
            }
            Ok(match best {
                Some((_, action, proof)) => AgentTrace {
                    variant: config.variant,
                    action: Some(action),
                    proof: Some(proof),
                    searched_targets: searched,
                    budget,
                },
                None => AgentTrace {
                    variant: config.variant,
                    action: None,
                    proof: None,
                    searched_targets: searched,
                    budget,
                },
            })
        }
    }
}

/// Sweep padding values and report the first at which the shortest-proof
/// agent flips from 10 to 5.
pub fn crossover_padding(max_padding: usize, budget: usize) -> Result<Option<usize>, AgentError> {
    for padding in 0..=max_padding {
        let world = obfuscate_universe(padding);
        let config = ProofAgentConfig {
            variant: AgentVariant::ShortestProofFirst,
            proof_budget: budget,
        };
        let trace = run_proof_agent(&world, &config)?;
        if trace.action == Some(5) {
            return Ok(Some(padding));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modal::formula::parse_formula;
    use crate::modal::proofs::Justification;
    use crate::modal::tableau::gl_valid;

    #[test]
    fn axiom_count_by_construction() {
        let world = FiveTenWorld::new();
        let asym = build_axioms(&world, &ProofAgentConfig::new(AgentVariant::AsymmetricDefault10));
        // 2 universe + 2 action uniqueness + 3 pairwise utility + 1 agent code
        assert_eq!(asym.len(), 8);
        let shortest =
            build_axioms(&world, &ProofAgentConfig::new(AgentVariant::ShortestProofFirst));
        assert_eq!(shortest.len(), 7);
        let chicken = build_axioms(&world, &ProofAgentConfig::new(AgentVariant::ChickenRule));
        assert_eq!(chicken.len(), 9);
        assert_eq!(chicken.axioms.iter().filter(|a| !a.global).count(), 2);
    }

    #[test]
    fn asymmetric_agent_axiom_includes_code_hook() {
        let world = FiveTenWorld::new();
        let set = build_axioms(&world, &ProofAgentConfig::new(AgentVariant::AsymmetricDefault10));
        let hook = parse_formula("[]((a5 -> u5) & (a10 -> u0)) -> a5").unwrap();
        let expected = Formula::implies(
            Formula::boxed(FiveTenWorld::spurious_statement()),
            FiveTenWorld::a5(),
        );
        assert_eq!(hook, expected);
        assert!(set.formulas().any(|f| *f == expected));
    }

    #[test]
    fn all_variants_have_consistent_axioms() {
        let world = FiveTenWorld::new();
        for variant in [
            AgentVariant::AsymmetricDefault10,
            AgentVariant::ShortestProofFirst,
            AgentVariant::ChickenRule,
        ] {
            let set = build_axioms(&world, &ProofAgentConfig::new(variant));
            assert!(
                axioms_consistent(&set).unwrap(),
                "{} axioms inconsistent",
                variant.name()
            );
        }
    }

    #[test]
    fn spurious_statement_is_semantic_consequence_for_asymmetric_agent() {
        let world = FiveTenWorld::new();
        let set = build_axioms(&world, &ProofAgentConfig::new(AgentVariant::AsymmetricDefault10));
        let implication = Formula::implies(
            set.premise_formula(),
            FiveTenWorld::spurious_statement(),
        );
        assert!(gl_valid(&implication).unwrap().is_valid());
    }

    #[test]
    fn asymmetric_agent_takes_five_with_verified_spurious_proof() {
        let world = FiveTenWorld::new();
        let config = ProofAgentConfig::new(AgentVariant::AsymmetricDefault10);
        let trace = run_proof_agent(&world, &config).unwrap();
        assert_eq!(trace.action, Some(5));
        let proof = trace.proof.expect("spurious proof attached");
        assert_eq!(*proof.target(), FiveTenWorld::spurious_statement());
        let axioms = build_axioms(&world, &config);
        check_proof(&axioms, &proof).unwrap();
        assert!(proof
            .lines
            .iter()
            .any(|l| l.justification == Justification::LobInstance));
    }

    #[test]
    fn shortest_proof_agent_takes_ten_unobfuscated() {
        let world = FiveTenWorld::new();
        let config = ProofAgentConfig::new(AgentVariant::ShortestProofFirst);
        let trace = run_proof_agent(&world, &config).unwrap();
        assert_eq!(trace.action, Some(10));
    }

    #[test]
    fn chicken_rule_agent_takes_ten_without_proving_its_action() {
        let world = FiveTenWorld::new();
        let config = ProofAgentConfig::new(AgentVariant::ChickenRule);
        let trace = run_proof_agent(&world, &config).unwrap();
        assert_eq!(trace.action, Some(10));
        let axioms = build_axioms(&world, &config);
        for action in [FiveTenWorld::a5(), FiveTenWorld::a10()] {
            assert!(
                enumerate_proofs(&axioms, &action, config.proof_budget)
                    .unwrap()
                    .is_none(),
                "chicken-rule axioms must not prove {action}"
            );
        }
    }

    #[test]
    fn padding_grows_honest_proof() {
        let unpadded = obfuscate_universe(0);
        assert_eq!(unpadded.padding, 0);
        let honest = FiveTenWorld::pair_statement(5, 10);
        let base_axioms =
            build_axioms(&unpadded, &ProofAgentConfig::new(AgentVariant::ShortestProofFirst));
        let base_len = enumerate_proofs(&base_axioms, &honest, 80)
            .unwrap()
            .expect("honest statement provable")
            .len();
        let padded =
            build_axioms(&obfuscate_universe(3), &ProofAgentConfig::new(AgentVariant::ShortestProofFirst));
        let padded_proof = enumerate_proofs(&padded, &honest, 80)
            .unwrap()
            .expect("honest statement still provable");
        assert!(padded_proof.len() > base_len);
        // The ten-branch payout alone takes one syllogism per link: at
        // padding 3 that is at least four modus ponens steps.
        let ten_branch = Formula::implies(FiveTenWorld::a10(), FiveTenWorld::utility(10));
        let branch_proof = enumerate_proofs(&padded, &ten_branch, 80)
            .unwrap()
            .expect("chain composes");
        let mp_steps = branch_proof
            .lines
            .iter()
            .filter(|l| matches!(l.justification, Justification::ModusPonens { .. }))
            .count();
        assert!(mp_steps >= 4, "got {mp_steps} modus ponens steps");
    }

    #[test]
    fn every_decided_trace_has_exactly_one_action_and_a_sound_proof() {
        for padding in [0usize, 3, 7] {
            let world = obfuscate_universe(padding);
            for variant in [
                AgentVariant::AsymmetricDefault10,
                AgentVariant::ShortestProofFirst,
                AgentVariant::ChickenRule,
            ] {
                let config = ProofAgentConfig::new(variant);
                let trace = run_proof_agent(&world, &config).unwrap();
                let action = trace.action.expect("default budget decides");
                assert!(action == 5 || action == 10);
                // Proofs carried by the trace re-verify against the axiom
                // set they were found in (the shortest-proof agent verifies
                // per-pair inside the run, so only re-check the others).
                if variant != AgentVariant::ShortestProofFirst {
                    if let Some(proof) = &trace.proof {
                        let axioms = build_axioms(&world, &config);
                        check_proof(&axioms, proof).unwrap();
                    }
                }
            }
        }
    }

    #[test]
    fn shortest_proofs_are_minimal_under_their_own_budget_gate() {
        // Shrinking the budget below a found proof's length must yield
        // absent, for the interesting search targets.
        let world = FiveTenWorld::new();
        let config = ProofAgentConfig::new(AgentVariant::AsymmetricDefault10);
        let axioms = build_axioms(&world, &config);
        for target in [
            FiveTenWorld::spurious_statement(),
            FiveTenWorld::pair_statement(5, 10),
        ] {
            let proof = enumerate_proofs(&axioms, &target, DEFAULT_PROOF_BUDGET)
                .unwrap()
                .expect("provable at the default budget");
            let n = proof.len();
            assert!(
                enumerate_proofs(&axioms, &target, n - 1).unwrap().is_none(),
                "budget {} must not admit the {}-line proof of {target}",
                n - 1,
                n
            );
            assert_eq!(
                enumerate_proofs(&axioms, &target, n).unwrap().unwrap().len(),
                n,
                "the search must be budget-invariant"
            );
        }
    }

    #[test]
    fn undecided_trace_when_budget_too_small() {
        let world = FiveTenWorld::new();
        let config = ProofAgentConfig {
            variant: AgentVariant::ShortestProofFirst,
            proof_budget: 1,
        };
        let trace = run_proof_agent(&world, &config).unwrap();
        assert_eq!(trace.action, None);
        assert!(trace.proof.is_none());
    }
}
