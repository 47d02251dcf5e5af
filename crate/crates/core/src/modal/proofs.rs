//! Bounded shortest-proof search in a Hilbert system for provability logic.
//!
//! The calculus: lines are propositional tautology instances (checked by
//! truth table with boxed subformulas opaque), distribution (K) instances,
//! provability-fixed-point (Löb) instances, axioms, modus ponens, and
//! necessitation. Axioms come in two strengths: a *global* axiom holds at
//! every world of the intended model and so may be necessitated; a *local*
//! axiom holds only at the evaluation world, and no line depending on it may
//! be necessitated. Mixing the two keeps self-referential axiom sets usable
//! without making the box collapse them into inconsistency.
//!
//! "Shortest" is relative to a declared, deterministic search space: schema
//! instances are drawn from the instantiation universe (the subformula
//! closure of axioms and target, closed under one negation and one box,
//! capped), and composite steps are generated by a fixed family of
//! derived-rule expansions, each of which emits its constituent raw lines
//! into the final proof. Costs are derivation-tree sizes; the returned
//! proof deduplicates repeated lines, and its line count is the length the
//! budget is checked against.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::formula::Formula;

pub const UNIVERSE_CAP: usize = 512;
const POOL_CAP: usize = 400_000;
const COST_SLACK_FACTOR: usize = 3;
const NODE_CAP_FACTOR: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProofSearchError {
    #[error("instantiation universe overflow: {size} formulas exceeds cap {cap}")]
    UniverseOverflow { size: usize, cap: usize },
    #[error("candidate pool overflow: more than {cap} lines generated")]
    PoolOverflow { cap: usize },
}

/// An axiom, with its premise strength.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Axiom {
    pub formula: Formula,
    /// Global axioms hold at every world and may sit under necessitation;
    /// local axioms hold only at the world of evaluation.
    pub global: bool,
}

impl Axiom {
    pub fn global(formula: Formula) -> Axiom {
        Axiom {
            formula,
            global: true,
        }
    }

    pub fn local(formula: Formula) -> Axiom {
        Axiom {
            formula,
            global: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomSet {
    pub axioms: Vec<Axiom>,
}

impl AxiomSet {
    pub fn empty() -> AxiomSet {
        AxiomSet { axioms: Vec::new() }
    }

    /// All-global axiom set.
    pub fn from_formulas(formulas: impl IntoIterator<Item = Formula>) -> AxiomSet {
        AxiomSet {
            axioms: formulas.into_iter().map(Axiom::global).collect(),
        }
    }

    pub fn push_global(&mut self, f: Formula) {
        self.axioms.push(Axiom::global(f));
    }

    pub fn push_local(&mut self, f: Formula) {
        self.axioms.push(Axiom::local(f));
    }

    pub fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.axioms.iter().map(|a| &a.formula)
    }

    pub fn len(&self) -> usize {
        self.axioms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axioms.is_empty()
    }

    /// Conjunction of the global axioms.
    pub fn global_conj(&self) -> Formula {
        let fs: Vec<Formula> = self
            .axioms
            .iter()
            .filter(|a| a.global)
            .map(|a| a.formula.clone())
            .collect();
        Formula::conj(&fs)
    }

    /// Conjunction of the local axioms.
    pub fn local_conj(&self) -> Formula {
        let fs: Vec<Formula> = self
            .axioms
            .iter()
            .filter(|a| !a.global)
            .map(|a| a.formula.clone())
            .collect();
        Formula::conj(&fs)
    }

    /// The single formula whose truth at a world captures this axiom set as
    /// premises: local axioms hold here, global axioms hold here and at all
    /// accessible worlds (transitivity closes the rest).
    pub fn premise_formula(&self) -> Formula {
        let g = self.global_conj();
        Formula::and(
            self.local_conj(),
            Formula::and(g.clone(), Formula::boxed(g)),
        )
    }
}

/// How a proof line is justified.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Justification {
    /// Index into the axiom set.
    Axiom(usize),
    /// Propositional tautology instance (boxes treated as opaque atoms).
    Tautology,
    /// Distribution schema instance: `[](a -> b) -> ([]a -> []b)`.
    KInstance,
    /// Provability fixed point schema instance: `[]([]a -> a) -> []a`.
    LobInstance,
    /// Modus ponens from lines `antecedent` and `implication` (indices).
    ModusPonens {
        antecedent: usize,
        implication: usize,
    },
    /// Necessitation of line `body` (which must not depend on local axioms).
    Necessitation { body: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofLine {
    pub formula: Formula,
    pub justification: Justification,
}

/// A Hilbert-style proof: an ordered list of justified lines ending in the
/// proved formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proof {
    pub lines: Vec<ProofLine>,
}

impl Proof {
    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn target(&self) -> &Formula {
        &self.lines.last().expect("proofs are nonempty").formula
    }
}

// ---------------------------------------------------------------------------
// Propositional tautology checking with opaque boxes.
// ---------------------------------------------------------------------------

/// Collect the propositional units of a formula: atoms and maximal boxed
/// subformulas.
fn collect_units(f: &Formula, units: &mut Vec<Formula>) {
    match f {
        Formula::Atom(_) | Formula::Box_(_) => {
            if !units.contains(f) {
                units.push(f.clone());
            }
        }
        Formula::Falsum => {}
        Formula::Implies(a, b) => {
            collect_units(a, units);
            collect_units(b, units);
        }
    }
}

fn eval_prop(f: &Formula, units: &[Formula], assignment: u32) -> bool {
    match f {
        Formula::Falsum => false,
        Formula::Atom(_) | Formula::Box_(_) => {
            let idx = units.iter().position(|u| u == f).unwrap();
            assignment >> idx & 1 == 1
        }
        Formula::Implies(a, b) => {
            !eval_prop(a, units, assignment) || eval_prop(b, units, assignment)
        }
    }
}

/// True when `f` is a propositional tautology, reading each boxed subformula
/// as an opaque atom. Formulas with more than 16 units are rejected.
pub fn is_tautology(f: &Formula) -> bool {
    let mut units = Vec::new();
    collect_units(f, &mut units);
    if units.len() > 16 {
        return false;
    }
    (0u32..1 << units.len()).all(|assignment| eval_prop(f, &units, assignment))
}

/// Does `f` match `[](a -> b) -> ([]a -> []b)`?
pub fn is_k_instance(f: &Formula) -> bool {
    let Formula::Implies(lhs, rhs) = f else {
        return false;
    };
    let Formula::Box_(ab) = &**lhs else {
        return false;
    };
    let Formula::Implies(a, b) = &**ab else {
        return false;
    };
    let Formula::Implies(ba, bb) = &**rhs else {
        return false;
    };
    **ba == Formula::boxed((**a).clone()) && **bb == Formula::boxed((**b).clone())
}

/// Does `f` match `[]([]a -> a) -> []a`?
pub fn is_lob_instance(f: &Formula) -> bool {
    let Formula::Implies(lhs, rhs) = f else {
        return false;
    };
    let Formula::Box_(body) = &**lhs else {
        return false;
    };
    let Formula::Implies(pa, a) = &**body else {
        return false;
    };
    **pa == Formula::boxed((**a).clone()) && **rhs == Formula::boxed((**a).clone())
}

// ---------------------------------------------------------------------------
// Instantiation universe.
// ---------------------------------------------------------------------------

/// Subformula closure of axioms and target, closed under one application of
/// negation and one of box.
pub fn instantiation_universe(
    axioms: &AxiomSet,
    target: &Formula,
) -> Result<BTreeSet<Formula>, ProofSearchError> {
    let mut base: BTreeSet<Formula> = target.subformulas();
    for ax in axioms.formulas() {
        base.extend(ax.subformulas());
    }
    let mut universe = base.clone();
    for f in &base {
        universe.insert(Formula::neg(f.clone()));
        universe.insert(Formula::boxed(f.clone()));
    }
    if universe.len() > UNIVERSE_CAP {
        return Err(ProofSearchError::UniverseOverflow {
            size: universe.len(),
            cap: UNIVERSE_CAP,
        });
    }
    Ok(universe)
}

// ---------------------------------------------------------------------------
// Shortest-proof search.
// ---------------------------------------------------------------------------

/// Whether a line may sit under necessitation (derived from global axioms
/// and schema instances only) or may depend on local axioms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Tier {
    /// Free of local-axiom dependencies; necessitation applies.
    Modal,
    /// May depend on local axioms.
    Any,
}

fn combine(a: Tier, b: Tier) -> Tier {
    if a == Tier::Modal && b == Tier::Modal {
        Tier::Modal
    } else {
        Tier::Any
    }
}

/// A primitive line a derivation step will emit, with references to earlier
/// formulas resolved at emission time.
#[derive(Debug, Clone)]
enum EmitJust {
    Axiom(usize),
    Taut,
    K,
    Lob,
    Mp { antecedent: Formula, implication: Formula },
    Nec { body: Formula },
}

#[derive(Debug, Clone)]
struct Deriv {
    /// Premise formulas with the tier each must be emitted at.
    premises: Vec<(Formula, Tier)>,
    /// Raw lines to append after the premises, in order. The last one is the
    /// derived formula itself.
    emit: Vec<(Formula, EmitJust)>,
}

#[derive(Debug, Clone)]
struct Candidate {
    cost: usize,
    tier: Tier,
    key: String,
    formula: Formula,
    deriv: Deriv,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cost == other.cost && self.tier == other.tier && self.key == other.key
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.cost, self.tier, &self.key).cmp(&(other.cost, other.tier, &other.key))
    }
}

#[derive(Default)]
struct Settled {
    modal: Option<(usize, Deriv)>,
    any: Option<(usize, Deriv)>,
}

impl Settled {
    fn cost(&self, tier: Tier) -> Option<usize> {
        match tier {
            Tier::Modal => self.modal.as_ref().map(|(c, _)| *c),
            Tier::Any => self.any.as_ref().map(|(c, _)| *c),
        }
    }
}

struct SearchSpace {
    universe: BTreeSet<Formula>,
    /// Antecedents eligible for the weakening expansion.
    antecedents: BTreeSet<Formula>,
    /// Consequents eligible for the weakening expansion. Restricting both
    /// ends keeps the reachable formula space finite: every generated
    /// implication has endpoints drawn from fixed sets.
    weaken_consequents: BTreeSet<Formula>,
    /// Conjunction-shaped formulas worth introducing.
    conj_targets: BTreeSet<Formula>,
    node_cap: usize,
    cost_cap: usize,
}

struct Search {
    space: SearchSpace,
    heap: BinaryHeap<Reverse<Candidate>>,
    settled: HashMap<Formula, Settled>,
    /// Formulas ever seen (for tautology-on-entry and pool accounting).
    seen: BTreeSet<Formula>,
    /// Settled implications indexed by antecedent and by consequent.
    by_antecedent: HashMap<Formula, Vec<Formula>>,
    by_consequent: HashMap<Formula, Vec<Formula>>,
    /// Boxed formulas wanted by some implication antecedent or the target.
    demands: BTreeSet<Formula>,
    /// Cheapest cost pushed so far per (formula, tier); trims duplicates.
    pushed: HashMap<(Formula, Tier), usize>,
}

impl Search {
    fn push(&mut self, formula: Formula, tier: Tier, cost: usize, deriv: Deriv) {
        if cost > self.space.cost_cap || formula.node_count() > self.space.node_cap {
            return;
        }
        if let Some(s) = self.settled.get(&formula) {
            if s.cost(tier).is_some() {
                return;
            }
            if tier == Tier::Any && s.cost(Tier::Modal).is_some() {
                return;
            }
        }
        match self.pushed.get(&(formula.clone(), tier)) {
            Some(&best) if best <= cost => return,
            _ => {
                self.pushed.insert((formula.clone(), tier), cost);
            }
        }
        self.note_seen(&formula);
        let key = formula.to_string();
        self.heap.push(Reverse(Candidate {
            cost,
            tier,
            key,
            formula,
            deriv,
        }));
    }

    /// First-encounter hook: tautologies enter at cost 1.
    fn note_seen(&mut self, formula: &Formula) {
        if self.seen.contains(formula) {
            return;
        }
        self.seen.insert(formula.clone());
        if is_tautology(formula) {
            let deriv = Deriv {
                premises: vec![],
                emit: vec![(formula.clone(), EmitJust::Taut)],
            };
            // Direct heap push to avoid recursion through note_seen.
            let key = formula.to_string();
            self.heap.push(Reverse(Candidate {
                cost: 1,
                tier: Tier::Modal,
                key,
                formula: formula.clone(),
                deriv,
            }));
        }
    }

    fn register_demand(&mut self, f: &Formula) {
        let Formula::Box_(body) = f else { return };
        if !self.demands.insert(f.clone()) {
            return;
        }
        let body = (**body).clone();
        if let Some((c, _)) = self
            .settled
            .get(&body)
            .and_then(|s| s.modal.as_ref())
            .map(|(c, d)| (*c, d.clone()))
        {
            self.push_nec(body.clone(), c);
        }
        // A demanded box may itself be obtainable by necessitation.
        self.register_demand(&body);
    }

    fn push_nec(&mut self, body: Formula, body_cost: usize) {
        let boxed = Formula::boxed(body.clone());
        let deriv = Deriv {
            premises: vec![(body.clone(), Tier::Modal)],
            emit: vec![(boxed.clone(), EmitJust::Nec { body })],
        };
        self.push(boxed, Tier::Modal, body_cost + 1, deriv);
    }

    fn mp_deriv(antecedent: &Formula, implication: &Formula, result: &Formula, ta: Tier, ti: Tier) -> Deriv {
        Deriv {
            premises: vec![(antecedent.clone(), ta), (implication.clone(), ti)],
            emit: vec![(
                result.clone(),
                EmitJust::Mp {
                    antecedent: antecedent.clone(),
                    implication: implication.clone(),
                },
            )],
        }
    }

    fn best_tiers(&self, f: &Formula) -> Vec<(Tier, usize)> {
        let mut out = Vec::new();
        if let Some(s) = self.settled.get(f) {
            if let Some((c, _)) = &s.modal {
                out.push((Tier::Modal, *c));
            }
            if let Some((c, _)) = &s.any {
                out.push((Tier::Any, *c));
            }
        }
        out
    }

    /// Modus ponens in both directions for a newly settled formula.
    fn expand_mp(&mut self, f: &Formula, tier: Tier, cost: usize) {
        if let Formula::Implies(a, b) = f {
            for (ta, ca) in self.best_tiers(a) {
                let deriv = Self::mp_deriv(a, f, b, ta, tier);
                self.push((**b).clone(), combine(ta, tier), ca + cost + 1, deriv);
            }
        }
        let partners: Vec<Formula> = self
            .by_antecedent
            .get(f)
            .map(|v| v.to_vec())
            .unwrap_or_default();
        for imp in partners {
            let Formula::Implies(_, b) = &imp else { continue };
            for (ti, ci) in self.best_tiers(&imp) {
                let deriv = Self::mp_deriv(f, &imp, b, tier, ti);
                self.push((**b).clone(), combine(tier, ti), cost + ci + 1, deriv);
            }
        }
    }

    /// Hypothetical syllogism: from x -> y and y -> z derive x -> z via a
    /// chain tautology instance and two modus ponens steps.
    fn hs_deriv(xy: &Formula, yz: &Formula, txy: Tier, tyz: Tier) -> Option<(Formula, Deriv)> {
        let Formula::Implies(x, y) = xy else {
            return None;
        };
        let Formula::Implies(y2, z) = yz else {
            return None;
        };
        if y != y2 {
            return None;
        }
        let xz = Formula::implies((**x).clone(), (**z).clone());
        let step2 = Formula::implies(yz.clone(), xz.clone());
        let chain = Formula::implies(xy.clone(), step2.clone());
        let deriv = Deriv {
            premises: vec![(xy.clone(), txy), (yz.clone(), tyz)],
            emit: vec![
                (chain.clone(), EmitJust::Taut),
                (
                    step2.clone(),
                    EmitJust::Mp {
                        antecedent: xy.clone(),
                        implication: chain,
                    },
                ),
                (
                    xz.clone(),
                    EmitJust::Mp {
                        antecedent: yz.clone(),
                        implication: step2,
                    },
                ),
            ],
        };
        Some((xz, deriv))
    }

    fn expand_hs(&mut self, f: &Formula, tier: Tier, cost: usize) {
        let Formula::Implies(x, y) = f else { return };
        // Compositions are only explored when the combined implication
        // starts from a declared antecedent; this keeps the reachable
        // implication space finite without losing any useful chain.
        if self.space.antecedents.contains(&**x) {
            // f as the left leg: partners whose antecedent is our consequent.
            let rights: Vec<Formula> = self
                .by_antecedent
                .get(&**y)
                .map(|v| v.to_vec())
                .unwrap_or_default();
            for yz in rights {
                let Formula::Implies(_, z) = &yz else { continue };
                if !self.composable_consequent(z) {
                    continue;
                }
                for (tr, cr) in self.best_tiers(&yz) {
                    if let Some((xz, deriv)) = Self::hs_deriv(f, &yz, tier, tr) {
                        self.push(xz, combine(tier, tr), cost + cr + 3, deriv);
                    }
                }
            }
        }
        // f as the right leg: partners whose consequent is our antecedent.
        let lefts: Vec<Formula> = self
            .by_consequent
            .get(&**x)
            .map(|v| v.to_vec())
            .unwrap_or_default();
        if !self.composable_consequent(y) {
            return;
        }
        for wx in lefts {
            let Formula::Implies(w, _) = &wx else { continue };
            if !self.space.antecedents.contains(&**w) {
                continue;
            }
            for (tl, cl) in self.best_tiers(&wx) {
                if let Some((wy, deriv)) = Self::hs_deriv(&wx, f, tl, tier) {
                    self.push(wy, combine(tl, tier), cl + cost + 3, deriv);
                }
            }
        }
    }

    /// Consequents allowed on composed implications; bounding both ends of
    /// a composition keeps the implication space finite.
    fn composable_consequent(&self, z: &Formula) -> bool {
        self.space.universe.contains(z) || self.space.weaken_consequents.contains(z)
    }

    /// Weakening: from a derive b -> a, for antecedents b of interest.
    fn expand_weaken(&mut self, f: &Formula, tier: Tier, cost: usize) {
        if !self.space.weaken_consequents.contains(f) {
            return;
        }
        let bs: Vec<Formula> = self.space.antecedents.iter().cloned().collect();
        for b in bs {
            if b == *f {
                continue;
            }
            let goal = Formula::implies(b.clone(), f.clone());
            let inst = Formula::implies(f.clone(), goal.clone());
            let deriv = Deriv {
                premises: vec![(f.clone(), tier)],
                emit: vec![
                    (inst.clone(), EmitJust::Taut),
                    (
                        goal.clone(),
                        EmitJust::Mp {
                            antecedent: f.clone(),
                            implication: inst,
                        },
                    ),
                ],
            };
            self.push(goal, tier, cost + 2, deriv);
        }
    }

    /// Export a conjunction-implication: from (a & b) -> c derive
    /// a -> (b -> c).
    fn expand_uncurry(&mut self, f: &Formula, tier: Tier, cost: usize) {
        let Formula::Implies(ab, c) = f else { return };
        let Some((a, b)) = ab.as_conjunction() else {
            return;
        };
        let (a, b) = (a.clone(), b.clone());
        for (first, second) in [(a.clone(), b.clone()), (b, a)] {
            let goal = Formula::implies(
                first,
                Formula::implies(second, (**c).clone()),
            );
            let inst = Formula::implies(f.clone(), goal.clone());
            if !is_tautology(&inst) {
                continue;
            }
            let deriv = Deriv {
                premises: vec![(f.clone(), tier)],
                emit: vec![
                    (inst.clone(), EmitJust::Taut),
                    (
                        goal.clone(),
                        EmitJust::Mp {
                            antecedent: f.clone(),
                            implication: inst,
                        },
                    ),
                ],
            };
            self.push(goal, tier, cost + 2, deriv);
        }
    }

    /// Conjunction introduction toward a universe conjunction, both plain
    /// (a, b => a & b) and under a shared antecedent
    /// (x -> a, x -> b => x -> (a & b)).
    fn expand_conj(&mut self, f: &Formula, tier: Tier, cost: usize) {
        let conj_targets: Vec<Formula> = self.space.conj_targets.iter().cloned().collect();
        for target in &conj_targets {
            let Some((a, b)) = target.as_conjunction() else {
                continue;
            };
            let (a, b) = (a.clone(), b.clone());
            for (mine, other) in [(&a, &b), (&b, &a)] {
                if f != mine {
                    continue;
                }
                for (to, co) in self.best_tiers(other) {
                    // plain introduction: a -> (b -> a & b), two MPs
                    let inst = Formula::implies(
                        a.clone(),
                        Formula::implies(b.clone(), target.clone()),
                    );
                    let step2 = Formula::implies(b.clone(), target.clone());
                    let deriv = Deriv {
                        premises: vec![(f.clone(), tier), (other.clone(), to)],
                        emit: vec![
                            (inst.clone(), EmitJust::Taut),
                            (
                                step2.clone(),
                                EmitJust::Mp {
                                    antecedent: a.clone(),
                                    implication: inst,
                                },
                            ),
                            (
                                target.clone(),
                                EmitJust::Mp {
                                    antecedent: b.clone(),
                                    implication: step2,
                                },
                            ),
                        ],
                    };
                    self.push(target.clone(), combine(tier, to), cost + co + 3, deriv);
                }
            }
        }
        // shared-antecedent form
        let Formula::Implies(x, a) = f else { return };
        for target in &conj_targets {
            let Some((ca, cb)) = target.as_conjunction() else {
                continue;
            };
            let (ca, cb) = (ca.clone(), cb.clone());
            let other_consequent = if **a == ca {
                cb.clone()
            } else if **a == cb {
                ca.clone()
            } else {
                continue;
            };
            let partner = Formula::implies((**x).clone(), other_consequent);
            for (tp, cp) in self.best_tiers(&partner) {
                let goal = Formula::implies((**x).clone(), target.clone());
                let (first, second) = if **a == ca {
                    (f.clone(), partner.clone())
                } else {
                    (partner.clone(), f.clone())
                };
                let inst = Formula::implies(
                    first.clone(),
                    Formula::implies(second.clone(), goal.clone()),
                );
                let step2 = Formula::implies(second.clone(), goal.clone());
                let deriv = Deriv {
                    premises: vec![(f.clone(), tier), (partner.clone(), tp)],
                    emit: vec![
                        (inst.clone(), EmitJust::Taut),
                        (
                            step2.clone(),
                            EmitJust::Mp {
                                antecedent: first,
                                implication: inst,
                            },
                        ),
                        (
                            goal.clone(),
                            EmitJust::Mp {
                                antecedent: second,
                                implication: step2,
                            },
                        ),
                    ],
                };
                self.push(goal, combine(tier, tp), cost + cp + 3, deriv);
            }
        }
    }

    /// Projections out of a settled conjunction.
    fn expand_proj(&mut self, f: &Formula, tier: Tier, cost: usize) {
        let Some((a, b)) = f.as_conjunction() else {
            return;
        };
        for side in [a.clone(), b.clone()] {
            let inst = Formula::implies(f.clone(), side.clone());
            if !is_tautology(&inst) {
                continue;
            }
            let deriv = Deriv {
                premises: vec![(f.clone(), tier)],
                emit: vec![
                    (inst.clone(), EmitJust::Taut),
                    (
                        side.clone(),
                        EmitJust::Mp {
                            antecedent: f.clone(),
                            implication: inst,
                        },
                    ),
                ],
            };
            self.push(side, tier, cost + 2, deriv);
        }
    }

    fn on_settle(&mut self, f: &Formula, tier: Tier, cost: usize) {
        if let Formula::Implies(a, b) = f {
            self.register_demand(a);
            // Index once per formula; tiers are looked up dynamically when
            // pairing, so the second-tier settle must not duplicate entries.
            let entry = self.by_antecedent.entry((**a).clone()).or_default();
            if !entry.contains(f) {
                entry.push(f.clone());
                self.by_consequent
                    .entry((**b).clone())
                    .or_default()
                    .push(f.clone());
            }
        }
        if tier == Tier::Modal && self.demands.contains(&Formula::boxed(f.clone())) {
            self.push_nec(f.clone(), cost);
        }
        self.expand_mp(f, tier, cost);
        self.expand_hs(f, tier, cost);
        self.expand_weaken(f, tier, cost);
        self.expand_uncurry(f, tier, cost);
        self.expand_conj(f, tier, cost);
        self.expand_proj(f, tier, cost);
    }
}

// ---------------------------------------------------------------------------
// Emission.
// ---------------------------------------------------------------------------

struct Emitter<'a> {
    settled: &'a HashMap<Formula, Settled>,
    axioms: &'a AxiomSet,
    lines: Vec<ProofLine>,
    /// formula -> (line index, line is free of local-axiom dependencies)
    index: HashMap<Formula, (usize, bool)>,
}

impl<'a> Emitter<'a> {
    fn line_of(&self, f: &Formula) -> usize {
        self.index[f].0
    }

    fn emit(&mut self, f: &Formula, tier: Tier) {
        if let Some(&(_, modal)) = self.index.get(f) {
            if modal || tier == Tier::Any {
                return;
            }
        }
        let settled = &self.settled[f];
        // For an Any request prefer the cheaper derivation, modal on ties
        // (a modal line satisfies every later use).
        let (used_tier, deriv) = match tier {
            Tier::Modal => (
                Tier::Modal,
                settled
                    .modal
                    .as_ref()
                    .expect("modal derivation required")
                    .1
                    .clone(),
            ),
            Tier::Any => match (&settled.modal, &settled.any) {
                (Some((cm, dm)), Some((ca, _))) if cm <= ca => (Tier::Modal, dm.clone()),
                (_, Some((_, da))) => (Tier::Any, da.clone()),
                (Some((_, dm)), None) => (Tier::Modal, dm.clone()),
                (None, None) => unreachable!("emitting unsettled formula"),
            },
        };
        for (premise, ptier) in &deriv.premises {
            self.emit(premise, *ptier);
        }
        for (formula, just) in &deriv.emit {
            // A line is reusable unless this derivation must be modal-clean
            // and the existing line for the formula is not.
            if let Some(&(_, modal)) = self.index.get(formula) {
                if modal || used_tier == Tier::Any {
                    continue;
                }
            }
            let modal_line = match just {
                EmitJust::Taut | EmitJust::K | EmitJust::Lob => true,
                EmitJust::Axiom(i) => self.axioms.axioms[*i].global,
                EmitJust::Mp { .. } | EmitJust::Nec { .. } => used_tier == Tier::Modal,
            };
            let justification = match just {
                EmitJust::Axiom(i) => Justification::Axiom(*i),
                EmitJust::Taut => Justification::Tautology,
                EmitJust::K => Justification::KInstance,
                EmitJust::Lob => Justification::LobInstance,
                EmitJust::Mp {
                    antecedent,
                    implication,
                } => Justification::ModusPonens {
                    antecedent: self.line_of(antecedent),
                    implication: self.line_of(implication),
                },
                EmitJust::Nec { body } => Justification::Necessitation {
                    body: self.line_of(body),
                },
            };
            let idx = self.lines.len();
            self.lines.push(ProofLine {
                formula: formula.clone(),
                justification,
            });
            self.index.insert(formula.clone(), (idx, modal_line));
        }
    }
}

/// Search for the shortest proof of `target` from `axioms` within the
/// declared space. Returns `None` when no proof with at most `max_length`
/// deduplicated lines is found.
pub fn enumerate_proofs(
    axioms: &AxiomSet,
    target: &Formula,
    max_length: usize,
) -> Result<Option<Proof>, ProofSearchError> {
    let universe = instantiation_universe(axioms, target)?;
    let max_node = universe
        .iter()
        .map(Formula::node_count)
        .max()
        .unwrap_or(1)
        .max(axioms.formulas().map(Formula::node_count).max().unwrap_or(1));
    let mut antecedents: BTreeSet<Formula> = BTreeSet::new();
    let mut base: BTreeSet<Formula> = target.subformulas();
    for ax in axioms.formulas() {
        base.extend(ax.subformulas());
    }
    for f in base.iter().chain(axioms.formulas()) {
        if let Formula::Implies(a, _) = f {
            antecedents.insert((**a).clone());
        }
    }
    let consequents: BTreeSet<Formula> = base
        .iter()
        .chain(axioms.formulas())
        .filter_map(|f| match f {
            Formula::Implies(_, b) => Some((**b).clone()),
            _ => None,
        })
        .collect();
    let conj_targets: BTreeSet<Formula> = universe
        .iter()
        .filter(|f| f.as_conjunction().is_some())
        .cloned()
        .collect();
    let mut weaken_consequents: BTreeSet<Formula> = consequents.clone();
    for c in &conj_targets {
        if let Some((a, b)) = c.as_conjunction() {
            weaken_consequents.insert(a.clone());
            weaken_consequents.insert(b.clone());
        }
    }

    let space = SearchSpace {
        universe: universe.clone(),
        antecedents,
        weaken_consequents,
        conj_targets,
        node_cap: max_node * NODE_CAP_FACTOR + 8,
        cost_cap: max_length.saturating_mul(COST_SLACK_FACTOR).max(8),
    };
    let mut search = Search {
        space,
        heap: BinaryHeap::new(),
        settled: HashMap::new(),
        seen: BTreeSet::new(),
        by_antecedent: HashMap::new(),
        by_consequent: HashMap::new(),
        demands: BTreeSet::new(),
        pushed: HashMap::new(),
    };

    // Seed: target (for the entry tautology check and box-demand peeling).
    search.note_seen(target);
    search.register_demand(target);

    // Seed: axioms.
    for (i, ax) in axioms.axioms.iter().enumerate() {
        let tier = if ax.global { Tier::Modal } else { Tier::Any };
        let deriv = Deriv {
            premises: vec![],
            emit: vec![(ax.formula.clone(), EmitJust::Axiom(i))],
        };
        search.push(ax.formula.clone(), tier, 1, deriv);
    }

    // Seed: universe members (tautology-on-entry) and schema instances.
    let universe_vec: Vec<Formula> = search.space.universe.iter().cloned().collect();
    for f in &universe_vec {
        search.note_seen(f);
        // Löb instance over f
        let lob = Formula::implies(
            Formula::boxed(Formula::implies(
                Formula::boxed(f.clone()),
                f.clone(),
            )),
            Formula::boxed(f.clone()),
        );
        let deriv = Deriv {
            premises: vec![],
            emit: vec![(lob.clone(), EmitJust::Lob)],
        };
        search.push(lob, Tier::Modal, 1, deriv);
        // K instance when f is an implication
        if let Formula::Implies(a, b) = f {
            let k = Formula::implies(
                Formula::boxed(f.clone()),
                Formula::implies(
                    Formula::boxed((**a).clone()),
                    Formula::boxed((**b).clone()),
                ),
            );
            let deriv = Deriv {
                premises: vec![],
                emit: vec![(k.clone(), EmitJust::K)],
            };
            search.push(k, Tier::Modal, 1, deriv);
        }
    }
    // Seed: ex-falso implications toward useful consequents, plus their
    // hypothetical forms (b -> false) -> (b -> d) over atomic endpoints.
    for d in &consequents {
        let efq = Formula::implies(Formula::Falsum, d.clone());
        let deriv = Deriv {
            premises: vec![],
            emit: vec![(efq.clone(), EmitJust::Taut)],
        };
        search.push(efq, Tier::Modal, 1, deriv);
    }
    let atomic = |f: &Formula| matches!(f, Formula::Atom(_) | Formula::Box_(_));
    for neg in universe_vec.iter().filter_map(|f| {
        f.as_negation()
            .filter(|b| atomic(b))
            .map(|b| (f.clone(), b.clone()))
    }) {
        let (neg_formula, b) = neg;
        for d in consequents.iter().filter(|d| atomic(d)) {
            let inst = Formula::implies(
                neg_formula.clone(),
                Formula::implies(b.clone(), d.clone()),
            );
            let deriv = Deriv {
                premises: vec![],
                emit: vec![(inst.clone(), EmitJust::Taut)],
            };
            search.push(inst, Tier::Modal, 1, deriv);
        }
    }

    // Uniform-cost loop.
    while let Some(Reverse(cand)) = search.heap.pop() {
        if search.seen.len() > POOL_CAP {
            return Err(ProofSearchError::PoolOverflow { cap: POOL_CAP });
        }
        let entry = search.settled.entry(cand.formula.clone()).or_default();
        match cand.tier {
            Tier::Modal => {
                if entry.modal.is_some() {
                    continue;
                }
                entry.modal = Some((cand.cost, cand.deriv.clone()));
                let had_any = entry.any.is_some();
                if !had_any {
                    entry.any = Some((cand.cost, cand.deriv.clone()));
                }
            }
            Tier::Any => {
                if entry.any.is_some() {
                    continue;
                }
                entry.any = Some((cand.cost, cand.deriv.clone()));
            }
        }
        search.on_settle(&cand.formula, cand.tier, cand.cost);
        if cand.formula == *target {
            // The first settle of the target (at either tier) is optimal in
            // tree cost; emit and gate on deduplicated length.
            let mut emitter = Emitter {
                settled: &search.settled,
                axioms,
                lines: Vec::new(),
                index: HashMap::new(),
            };
            emitter.emit(target, Tier::Any);
            let proof = Proof {
                lines: emitter.lines,
            };
            debug_assert_eq!(proof.target(), target);
            if proof.len() <= max_length {
                return Ok(Some(proof));
            }
            return Ok(None);
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modal::formula::parse_formula;
    use crate::modal::proof_check::check_proof;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn identity_proof_is_one_tautology_line() {
        let axioms = AxiomSet::empty();
        let proof = enumerate_proofs(&axioms, &p("p -> p"), 10)
            .unwrap()
            .expect("p -> p is provable");
        assert_eq!(proof.len(), 1);
        assert_eq!(proof.lines[0].justification, Justification::Tautology);
        check_proof(&axioms, &proof).unwrap();
    }

    #[test]
    fn lob_axiom_instance_is_one_line() {
        let axioms = AxiomSet::empty();
        let target = p("[]([]p -> p) -> []p");
        let proof = enumerate_proofs(&axioms, &target, 10)
            .unwrap()
            .expect("schema instance");
        assert_eq!(proof.len(), 1);
        assert_eq!(proof.lines[0].justification, Justification::LobInstance);
        check_proof(&axioms, &proof).unwrap();
    }

    #[test]
    fn k_instance_is_one_line() {
        let axioms = AxiomSet::empty();
        let target = p("[](p -> q) -> ([]p -> []q)");
        let proof = enumerate_proofs(&axioms, &target, 10)
            .unwrap()
            .expect("schema instance");
        assert_eq!(proof.len(), 1);
        check_proof(&axioms, &proof).unwrap();
    }

    #[test]
    fn modus_ponens_chain() {
        let axioms = AxiomSet::from_formulas([p("a"), p("a -> b"), p("b -> c")]);
        let proof = enumerate_proofs(&axioms, &p("c"), 10)
            .unwrap()
            .expect("chain is derivable");
        check_proof(&axioms, &proof).unwrap();
        assert_eq!(*proof.target(), p("c"));
        assert!(proof.len() <= 5, "got {}", proof.len());
    }

    #[test]
    fn necessitation_of_premise_free_line() {
        let axioms = AxiomSet::empty();
        let proof = enumerate_proofs(&axioms, &p("[](p -> p)"), 10)
            .unwrap()
            .expect("necessitated tautology");
        check_proof(&axioms, &proof).unwrap();
        assert_eq!(proof.len(), 2);
    }

    #[test]
    fn global_axiom_can_be_necessitated_local_cannot() {
        let mut axioms = AxiomSet::empty();
        axioms.push_global(p("a"));
        let proof = enumerate_proofs(&axioms, &p("[]a"), 10).unwrap();
        assert!(proof.is_some());
        check_proof(&axioms, proof.as_ref().unwrap()).unwrap();

        let mut local = AxiomSet::empty();
        local.push_local(p("a"));
        let proof = enumerate_proofs(&local, &p("[]a"), 50).unwrap();
        assert!(proof.is_none(), "local axioms must not be necessitated");
    }

    #[test]
    fn budget_gates_length() {
        let axioms = AxiomSet::from_formulas([p("a"), p("a -> b")]);
        let proof = enumerate_proofs(&axioms, &p("b"), 10).unwrap().unwrap();
        let n = proof.len();
        assert!(enumerate_proofs(&axioms, &p("b"), n - 1).unwrap().is_none());
    }

    #[test]
    fn underivable_formula_yields_none() {
        let axioms = AxiomSet::from_formulas([p("a -> b")]);
        assert!(enumerate_proofs(&axioms, &p("b"), 30).unwrap().is_none());
    }

    #[test]
    fn universe_overflow_is_reported() {
        let mut axioms = AxiomSet::empty();
        for i in 0..200 {
            axioms.push_global(p(&format!("x{i} -> x{}", i + 1)));
        }
        match enumerate_proofs(&axioms, &p("x0 -> x200"), 10) {
            Err(ProofSearchError::UniverseOverflow { size, cap }) => {
                assert!(size > cap);
            }
            other => panic!("expected universe overflow, got {other:?}"),
        }
    }

    #[test]
    fn conjunction_of_axioms() {
        let axioms = AxiomSet::from_formulas([p("a"), p("b")]);
        let proof = enumerate_proofs(&axioms, &p("a & b"), 10)
            .unwrap()
            .expect("conjunction introduction");
        check_proof(&axioms, &proof).unwrap();
    }
}
