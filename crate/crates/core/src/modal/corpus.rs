//! Deterministic formula corpus for cross-checking the tableau against the
//! bounded exhaustive model search.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::formula::Formula;
use super::kripke::eval_at;
use super::smallmodel::{find_countermodel, SmallModelOutcome};
use super::tableau::{gl_valid, Validity};

const ATOM_NAMES: [&str; 4] = ["p", "q", "r", "s"];

fn random_formula(rng: &mut ChaCha8Rng, atoms: usize, fuel: usize, boxes_left: usize) -> Formula {
    if fuel == 0 {
        return if rng.gen_ratio(1, 10) {
            Formula::falsum()
        } else {
            Formula::atom(ATOM_NAMES[rng.gen_range(0..atoms)])
        };
    }
    match rng.gen_range(0..100u32) {
        0..=29 => Formula::implies(
            random_formula(rng, atoms, fuel / 2, boxes_left),
            random_formula(rng, atoms, fuel / 2, boxes_left),
        ),
        30..=49 if boxes_left > 0 => Formula::boxed(random_formula(
            rng,
            atoms,
            fuel - 1,
            boxes_left - 1,
        )),
        50..=64 => Formula::neg(random_formula(rng, atoms, fuel - 1, boxes_left)),
        65..=76 => Formula::and(
            random_formula(rng, atoms, fuel / 2, boxes_left),
            random_formula(rng, atoms, fuel / 2, boxes_left),
        ),
        77..=88 => Formula::or(
            random_formula(rng, atoms, fuel / 2, boxes_left),
            random_formula(rng, atoms, fuel / 2, boxes_left),
        ),
        89..=94 if boxes_left > 0 => Formula::diamond(random_formula(
            rng,
            atoms,
            fuel - 1,
            boxes_left - 1,
        )),
        _ => random_formula(rng, atoms, 0, boxes_left),
    }
}

/// Deterministic corpus of formulas with modal depth at most 3 and at most
/// 4 atoms: random trees plus schema instances over random bodies (so both
/// valid and invalid formulas are well represented).
pub fn formula_corpus(count: usize, seed: u64) -> Vec<Formula> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        // Mostly small atom counts: the oracle's model sweep is exponential
        // in atoms * worlds.
        let atoms = match rng.gen_range(0..100u32) {
            0..=19 => 1,
            20..=69 => 2,
            70..=94 => 3,
            _ => 4,
        };
        let f = if i % 5 == 0 {
            // Schema instance over a random body.
            let body = random_formula(&mut rng, atoms, 2, 1);
            match rng.gen_range(0..4u32) {
                0 => {
                    // provability fixed point
                    let bx = Formula::boxed(body.clone());
                    Formula::implies(
                        Formula::boxed(Formula::implies(bx.clone(), body)),
                        bx,
                    )
                }
                1 => {
                    // transitivity
                    let bx = Formula::boxed(body.clone());
                    Formula::implies(bx.clone(), Formula::boxed(bx))
                }
                2 => {
                    // reflection (invalid in general)
                    Formula::implies(Formula::boxed(body.clone()), body)
                }
                _ => {
                    // distribution over a random implication
                    let rhs = random_formula(&mut rng, atoms, 2, 1);
                    Formula::implies(
                        Formula::boxed(Formula::implies(body.clone(), rhs.clone())),
                        Formula::implies(
                            Formula::boxed(body),
                            Formula::boxed(rhs),
                        ),
                    )
                }
            }
        } else {
            let fuel = rng.gen_range(2..=4) + atoms;
            random_formula(&mut rng, atoms, fuel, 3)
        };
        debug_assert!(f.modal_depth() <= 3);
        out.push(f);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgreementFailure {
    pub formula: String,
    pub reason: String,
}

/// Cross-check the tableau against the bounded model oracle on one formula.
///
/// Agreement means: whenever the oracle finds a countermodel the tableau
/// must answer invalid, and whenever the tableau answers invalid its
/// returned countermodel must actually falsify the formula (the oracle's
/// four-world bound can miss wide countermodels, so "oracle found none" and
/// "invalid" can legitimately coexist).
pub fn check_agreement(f: &Formula) -> Result<(), AgreementFailure> {
    let fail = |reason: String| AgreementFailure {
        formula: f.to_string(),
        reason,
    };
    let tableau = gl_valid(f).map_err(|e| fail(format!("budget: {e}")))?;
    let oracle = find_countermodel(f, 4);
    match (&oracle, &tableau) {
        (SmallModelOutcome::Countermodel(model, world), verdict) => {
            match eval_at(model, *world, f) {
                Ok(false) => {}
                other => return Err(fail(format!("oracle countermodel bogus: {other:?}"))),
            }
            if verdict.is_valid() {
                return Err(fail("oracle refutes but tableau says valid".into()));
            }
        }
        (SmallModelOutcome::NoneFound, Validity::Invalid { .. }) => {}
        (SmallModelOutcome::NoneFound, Validity::Valid) => {}
    }
    if let Validity::Invalid {
        countermodel,
        world,
    } = &tableau
    {
        match eval_at(countermodel, *world, f) {
            Ok(false) => {}
            other => {
                return Err(fail(format!(
                    "tableau countermodel fails verification: {other:?}"
                )))
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_deterministic() {
        let a = formula_corpus(50, 11);
        let b = formula_corpus(50, 11);
        assert_eq!(a, b);
        let c = formula_corpus(50, 12);
        assert_ne!(a, c);
    }

    #[test]
    fn corpus_respects_depth_and_atom_bounds() {
        for f in formula_corpus(200, 5) {
            assert!(f.modal_depth() <= 3, "{f}");
            assert!(f.atoms().len() <= 4, "{f}");
        }
    }

    #[test]
    fn small_corpus_agreement() {
        for f in formula_corpus(60, 17) {
            check_agreement(&f).unwrap();
        }
    }
}
