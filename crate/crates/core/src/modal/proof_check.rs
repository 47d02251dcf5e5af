//! Line-by-line proof verification, independent of the proof search.
//!
//! The checker recomputes every side condition from scratch: tautology
//! instances by its own truth-table sweep, schema shapes by pattern match,
//! modus ponens by exact formula comparison against earlier lines, and
//! necessitation eligibility by propagating local-axiom dependency flags.

use super::formula::Formula;
use super::proofs::{AxiomSet, Justification, Proof};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProofCheckError {
    #[error("proof has no lines")]
    Empty,
    #[error("line {line}: axiom index {index} out of range")]
    BadAxiomIndex { line: usize, index: usize },
    #[error("line {line}: formula does not match axiom {index}")]
    AxiomMismatch { line: usize, index: usize },
    #[error("line {line}: not a propositional tautology")]
    NotTautology { line: usize },
    #[error("line {line}: not a distribution schema instance")]
    NotKInstance { line: usize },
    #[error("line {line}: not a provability fixed-point schema instance")]
    NotLobInstance { line: usize },
    #[error("line {line}: modus ponens reference {reference} is not an earlier line")]
    ForwardReference { line: usize, reference: usize },
    #[error("line {line}: modus ponens premises do not compose to this formula")]
    BadModusPonens { line: usize },
    #[error("line {line}: necessitation body mismatch")]
    BadNecessitation { line: usize },
    #[error("line {line}: necessitation applied to a line depending on a local axiom")]
    NecessitationOnLocal { line: usize },
}

/// Propositional evaluation with boxed subformulas opaque; the checker's own
/// copy, kept separate from the search-side implementation on purpose.
fn tautology_by_table(f: &Formula) -> bool {
    fn units(f: &Formula, out: &mut Vec<Formula>) {
        match f {
            Formula::Atom(_) | Formula::Box_(_) => {
                if !out.contains(f) {
                    out.push(f.clone());
                }
            }
            Formula::Falsum => {}
            Formula::Implies(a, b) => {
                units(a, out);
                units(b, out);
            }
        }
    }
    fn eval(f: &Formula, us: &[Formula], bits: u32) -> bool {
        match f {
            Formula::Falsum => false,
            Formula::Atom(_) | Formula::Box_(_) => {
                bits >> us.iter().position(|u| u == f).unwrap() & 1 == 1
            }
            Formula::Implies(a, b) => !eval(a, us, bits) || eval(b, us, bits),
        }
    }
    let mut us = Vec::new();
    units(f, &mut us);
    if us.len() > 16 {
        return false;
    }
    (0u32..1 << us.len()).all(|bits| eval(f, &us, bits))
}

fn k_shape(f: &Formula) -> bool {
    let Formula::Implies(lhs, rhs) = f else {
        return false;
    };
    let Formula::Box_(ab) = &**lhs else {
        return false;
    };
    let Formula::Implies(a, b) = &**ab else {
        return false;
    };
    let Formula::Implies(bxa, bxb) = &**rhs else {
        return false;
    };
    **bxa == Formula::boxed((**a).clone()) && **bxb == Formula::boxed((**b).clone())
}

fn lob_shape(f: &Formula) -> bool {
    let Formula::Implies(lhs, rhs) = f else {
        return false;
    };
    let Formula::Box_(body) = &**lhs else {
        return false;
    };
    let Formula::Implies(bxa, a) = &**body else {
        return false;
    };
    **bxa == Formula::boxed((**a).clone()) && **rhs == Formula::boxed((**a).clone())
}

/// Verify every line of `proof` against `axioms`. On success the final line
/// is a theorem of the axiom set in the mixed global/local reading.
pub fn check_proof(axioms: &AxiomSet, proof: &Proof) -> Result<(), ProofCheckError> {
    if proof.lines.is_empty() {
        return Err(ProofCheckError::Empty);
    }
    // local_free[i]: line i does not depend on any local axiom.
    let mut local_free = Vec::with_capacity(proof.lines.len());
    for (i, line) in proof.lines.iter().enumerate() {
        let free = match &line.justification {
            Justification::Axiom(index) => {
                let ax = axioms
                    .axioms
                    .get(*index)
                    .ok_or(ProofCheckError::BadAxiomIndex { line: i, index: *index })?;
                if ax.formula != line.formula {
                    return Err(ProofCheckError::AxiomMismatch { line: i, index: *index });
                }
                ax.global
            }
            Justification::Tautology => {
                if !tautology_by_table(&line.formula) {
                    return Err(ProofCheckError::NotTautology { line: i });
                }
                true
            }
            Justification::KInstance => {
                if !k_shape(&line.formula) {
                    return Err(ProofCheckError::NotKInstance { line: i });
                }
                true
            }
            Justification::LobInstance => {
                if !lob_shape(&line.formula) {
                    return Err(ProofCheckError::NotLobInstance { line: i });
                }
                true
            }
            Justification::ModusPonens {
                antecedent,
                implication,
            } => {
                for r in [*antecedent, *implication] {
                    if r >= i {
                        return Err(ProofCheckError::ForwardReference { line: i, reference: r });
                    }
                }
                let ant = &proof.lines[*antecedent].formula;
                let imp = &proof.lines[*implication].formula;
                match imp {
                    Formula::Implies(a, b) if **a == *ant && **b == line.formula => {}
                    _ => return Err(ProofCheckError::BadModusPonens { line: i }),
                }
                local_free[*antecedent] && local_free[*implication]
            }
            Justification::Necessitation { body } => {
                if *body >= i {
                    return Err(ProofCheckError::ForwardReference { line: i, reference: *body });
                }
                if line.formula != Formula::boxed(proof.lines[*body].formula.clone()) {
                    return Err(ProofCheckError::BadNecessitation { line: i });
                }
                if !local_free[*body] {
                    return Err(ProofCheckError::NecessitationOnLocal { line: i });
                }
                true
            }
        };
        local_free.push(free);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modal::formula::parse_formula;
    use crate::modal::proofs::ProofLine;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn rejects_fake_tautology() {
        let proof = Proof {
            lines: vec![ProofLine {
                formula: p("p -> q"),
                justification: Justification::Tautology,
            }],
        };
        assert!(matches!(
            check_proof(&AxiomSet::empty(), &proof),
            Err(ProofCheckError::NotTautology { line: 0 })
        ));
    }

    #[test]
    fn rejects_necessitation_of_local_axiom() {
        let mut axioms = AxiomSet::empty();
        axioms.push_local(p("a"));
        let proof = Proof {
            lines: vec![
                ProofLine {
                    formula: p("a"),
                    justification: Justification::Axiom(0),
                },
                ProofLine {
                    formula: p("[]a"),
                    justification: Justification::Necessitation { body: 0 },
                },
            ],
        };
        assert!(matches!(
            check_proof(&axioms, &proof),
            Err(ProofCheckError::NecessitationOnLocal { line: 1 })
        ));
    }

    #[test]
    fn accepts_necessitation_of_global_axiom() {
        let mut axioms = AxiomSet::empty();
        axioms.push_global(p("a"));
        let proof = Proof {
            lines: vec![
                ProofLine {
                    formula: p("a"),
                    justification: Justification::Axiom(0),
                },
                ProofLine {
                    formula: p("[]a"),
                    justification: Justification::Necessitation { body: 0 },
                },
            ],
        };
        check_proof(&axioms, &proof).unwrap();
    }

    #[test]
    fn rejects_bad_modus_ponens() {
        let axioms = AxiomSet::from_formulas([p("a"), p("b -> c")]);
        let proof = Proof {
            lines: vec![
                ProofLine {
                    formula: p("a"),
                    justification: Justification::Axiom(0),
                },
                ProofLine {
                    formula: p("b -> c"),
                    justification: Justification::Axiom(1),
                },
                ProofLine {
                    formula: p("c"),
                    justification: Justification::ModusPonens {
                        antecedent: 0,
                        implication: 1,
                    },
                },
            ],
        };
        assert!(matches!(
            check_proof(&axioms, &proof),
            Err(ProofCheckError::BadModusPonens { line: 2 })
        ));
    }

    #[test]
    fn accepts_lob_and_k_shapes() {
        let proof = Proof {
            lines: vec![
                ProofLine {
                    formula: p("[]([]p -> p) -> []p"),
                    justification: Justification::LobInstance,
                },
                ProofLine {
                    formula: p("[](p -> q) -> ([]p -> []q)"),
                    justification: Justification::KInstance,
                },
            ],
        };
        check_proof(&AxiomSet::empty(), &proof).unwrap();
    }
}
