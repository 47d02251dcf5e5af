//! Validity for provability logic via a terminating signed tableau.
//!
//! Satisfiability search: saturate a world propositionally, then for every
//! box signed false jump to a fresh successor carrying every true box and
//! its body (transitivity) plus the refuted box itself signed true (there is
//! always a *last* world where the body fails, because the frames are
//! converse well-founded). Each jump strictly grows the set of true boxes
//! drawn from the finite subformula closure, so the search terminates.

use std::collections::BTreeSet;

use super::formula::Formula;
use super::kripke::{KripkeModel, WorldId};

/// The node budget was exhausted before the search finished. Reported,
/// never silently treated as an answer.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("tableau node budget of {budget} exceeded")]
pub struct BudgetExceeded {
    pub budget: usize,
}

#[derive(Debug, Clone)]
pub enum Validity {
    Valid,
    Invalid {
        countermodel: KripkeModel,
        world: WorldId,
    },
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid)
    }
}

pub const DEFAULT_NODE_BUDGET: usize = 200_000;

/// A fully saturated, clash-free world under construction.
#[derive(Debug, Clone, Default)]
struct Branch {
    true_set: BTreeSet<Formula>,
    false_set: BTreeSet<Formula>,
}

/// Countermodel skeleton: one world plus the subtrees hung off its refuted
/// boxes. The accessibility relation of the final model is the strict
/// descendant relation of this tree.
struct WorldSketch {
    atoms: BTreeSet<String>,
    children: Vec<WorldSketch>,
}

struct Search {
    budget: usize,
    used: usize,
}

impl Search {
    fn spend(&mut self) -> Result<(), BudgetExceeded> {
        self.used += 1;
        if self.used > self.budget {
            Err(BudgetExceeded {
                budget: self.budget,
            })
        } else {
            Ok(())
        }
    }

    /// Saturate `todo` into `branch`, branching on true implications.
    /// Returns a satisfying world sketch if some saturation is modally
    /// satisfiable.
    fn saturate(
        &mut self,
        mut branch: Branch,
        mut todo: Vec<(Formula, bool)>,
    ) -> Result<Option<WorldSketch>, BudgetExceeded> {
        while let Some((f, sign)) = todo.pop() {
            self.spend()?;
            let (already, opposite) = if sign {
                (branch.true_set.contains(&f), branch.false_set.contains(&f))
            } else {
                (branch.false_set.contains(&f), branch.true_set.contains(&f))
            };
            if opposite {
                return Ok(None);
            }
            if already {
                continue;
            }
            match (&f, sign) {
                (Formula::Falsum, true) => return Ok(None),
                (Formula::Implies(a, b), true) => {
                    branch.true_set.insert(f.clone());
                    // Try the branch where the antecedent fails, then the
                    // branch where the consequent holds.
                    let mut todo_left = todo.clone();
                    todo_left.push(((**a).clone(), false));
                    if let Some(model) = self.saturate(branch.clone(), todo_left)? {
                        return Ok(Some(model));
                    }
                    todo.push(((**b).clone(), true));
                    return self.saturate(branch, todo);
                }
                (Formula::Implies(a, b), false) => {
                    branch.false_set.insert(f.clone());
                    todo.push(((**a).clone(), true));
                    todo.push(((**b).clone(), false));
                }
                _ => {
                    // Atoms, falsum signed false, and boxes are inert here;
                    // boxes are handled in the modal stage.
                    if sign {
                        branch.true_set.insert(f.clone());
                    } else {
                        branch.false_set.insert(f.clone());
                    }
                }
            }
        }
        self.expand_modals(branch)
    }

    fn expand_modals(&mut self, branch: Branch) -> Result<Option<WorldSketch>, BudgetExceeded> {
        let true_boxes: Vec<&Formula> = branch
            .true_set
            .iter()
            .filter(|f| matches!(f, Formula::Box_(_)))
            .collect();
        let mut children = Vec::new();
        for refuted in branch
            .false_set
            .iter()
            .filter(|f| matches!(f, Formula::Box_(_)))
        {
            self.spend()?;
            let body = match refuted {
                Formula::Box_(b) => (**b).clone(),
                _ => unreachable!(),
            };
            let mut todo = vec![(body, false), ((*refuted).clone(), true)];
            for tb in &true_boxes {
                if let Formula::Box_(inner) = tb {
                    todo.push(((**tb).clone(), true));
                    todo.push(((**inner).clone(), true));
                }
            }
            match self.saturate(Branch::default(), todo)? {
                Some(child) => children.push(child),
                None => return Ok(None),
            }
        }
        let atoms = branch
            .true_set
            .iter()
            .filter_map(|f| match f {
                Formula::Atom(name) => Some(name.clone()),
                _ => None,
            })
            .collect();
        Ok(Some(WorldSketch { atoms, children }))
    }
}

fn assemble(sketch: &WorldSketch) -> KripkeModel {
    fn walk(
        sketch: &WorldSketch,
        next_id: &mut usize,
        edges: &mut Vec<(WorldId, WorldId)>,
        valuation: &mut Vec<(WorldId, BTreeSet<String>)>,
    ) -> (WorldId, Vec<WorldId>) {
        let id = *next_id;
        *next_id += 1;
        valuation.push((id, sketch.atoms.clone()));
        let mut descendants = Vec::new();
        for child in &sketch.children {
            let (cid, mut sub) = walk(child, next_id, edges, valuation);
            descendants.push(cid);
            descendants.append(&mut sub);
        }
        for &d in &descendants {
            edges.push((id, d));
        }
        (id, descendants)
    }
    let mut next_id = 0;
    let mut edges = Vec::new();
    let mut valuation = Vec::new();
    walk(sketch, &mut next_id, &mut edges, &mut valuation);
    KripkeModel::new(next_id, edges, valuation)
        .expect("descendant relation of a tree is transitive and irreflexive")
}

/// Search for a world (in some finite transitive irreflexive model)
/// satisfying `f`. Returns the model and the satisfying world id.
pub fn gl_satisfiable_budget(
    f: &Formula,
    budget: usize,
) -> Result<Option<(KripkeModel, WorldId)>, BudgetExceeded> {
    let mut search = Search { budget, used: 0 };
    let sketch = search.saturate(Branch::default(), vec![(f.clone(), true)])?;
    Ok(sketch.map(|s| (assemble(&s), 0)))
}

pub fn gl_satisfiable(f: &Formula) -> Result<Option<(KripkeModel, WorldId)>, BudgetExceeded> {
    gl_satisfiable_budget(f, DEFAULT_NODE_BUDGET)
}

/// Decide validity of `f` over all finite transitive irreflexive models.
/// On `Invalid`, the returned countermodel falsifies `f` at `world` (always
/// the root of the returned model).
pub fn gl_valid_budget(f: &Formula, budget: usize) -> Result<Validity, BudgetExceeded> {
    let mut search = Search { budget, used: 0 };
    let sketch = search.saturate(Branch::default(), vec![(f.clone(), false)])?;
    Ok(match sketch {
        None => Validity::Valid,
        Some(s) => Validity::Invalid {
            countermodel: assemble(&s),
            world: 0,
        },
    })
}

pub fn gl_valid(f: &Formula) -> Result<Validity, BudgetExceeded> {
    gl_valid_budget(f, DEFAULT_NODE_BUDGET)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modal::formula::parse_formula;
    use crate::modal::kripke::eval_at;

    fn valid(s: &str) -> bool {
        gl_valid(&parse_formula(s).unwrap()).unwrap().is_valid()
    }

    #[test]
    fn lob_axiom_is_valid() {
        assert!(valid("[]([]p -> p) -> []p"));
    }

    #[test]
    fn transitivity_axiom_is_valid() {
        assert!(valid("[]p -> [][]p"));
    }

    #[test]
    fn k_axiom_is_valid() {
        assert!(valid("[](p -> q) -> ([]p -> []q)"));
    }

    #[test]
    fn girard_formula_box_falsum() {
        // No consistency: <>true fails at terminal worlds.
        assert!(!valid("<>true"));
        assert!(!valid("!([]false)"));
    }

    #[test]
    fn reflection_is_invalid_with_verifying_countermodel() {
        let f = parse_formula("[]p -> p").unwrap();
        match gl_valid(&f).unwrap() {
            Validity::Invalid {
                countermodel,
                world,
            } => {
                assert_eq!(eval_at(&countermodel, world, &f), Ok(false));
                assert_eq!(countermodel.world_count(), 1);
            }
            Validity::Valid => panic!("[]p -> p must be invalid"),
        }
    }

    #[test]
    fn necessitation_preserved_on_samples() {
        for s in ["[]([]p -> p) -> []p", "p -> p", "[]p -> [][]p"] {
            assert!(valid(s));
            assert!(valid(&format!("[]({s})")));
        }
    }

    #[test]
    fn deep_invalid_formula_gets_checked_countermodel() {
        // Needs a 2-chain to refute.
        let f = parse_formula("[]([]p -> p)").unwrap();
        match gl_valid(&f).unwrap() {
            Validity::Invalid {
                countermodel,
                world,
            } => {
                assert_eq!(eval_at(&countermodel, world, &f), Ok(false));
            }
            Validity::Valid => panic!("expected invalid"),
        }
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let f = parse_formula("[]([]p -> p) -> []p").unwrap();
        assert!(gl_valid_budget(&f, 2).is_err());
    }
}
