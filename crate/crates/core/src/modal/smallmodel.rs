//! Exhaustive search over all transitive irreflexive Kripke models with a
//! bounded number of worlds. This is a brute-force oracle used to cross-check
//! the tableau-based validity decision; the tableau never calls into it.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use super::formula::Formula;
use super::kripke::KripkeModel;

/// All transitive irreflexive relations on `n` labeled worlds, as edge lists.
fn relations_on(n: usize) -> &'static Vec<Vec<(usize, usize)>> {
    static CACHE: OnceLock<Vec<Vec<Vec<(usize, usize)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        let mut per_size = Vec::new();
        for n in 0..=4usize {
            let pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
                .collect();
            let mut rels = Vec::new();
            'mask: for mask in 0u32..(1 << pairs.len()) {
                let edges: Vec<(usize, usize)> = pairs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &e)| e)
                    .collect();
                let set: BTreeSet<(usize, usize)> = edges.iter().copied().collect();
                for &(a, b) in &edges {
                    for &(c, d) in &edges {
                        if b == c && !set.contains(&(a, d)) {
                            continue 'mask;
                        }
                    }
                }
                rels.push(edges);
            }
            per_size.push(rels);
        }
        per_size
    });
    &cache[n]
}

/// Result of the bounded exhaustive search.
#[derive(Debug, Clone)]
pub enum SmallModelOutcome {
    /// A model of at most `max_worlds` worlds falsifies the formula at the
    /// given world.
    Countermodel(KripkeModel, usize),
    /// No model within the bound falsifies the formula.
    NoneFound,
}

/// Search every transitive irreflexive model with `1..=max_worlds` worlds
/// (at most 4) and every valuation of the formula's atoms for a world where
/// `f` fails. Bitmask evaluation: each subformula's truth is a mask of
/// worlds.
pub fn find_countermodel(f: &Formula, max_worlds: usize) -> SmallModelOutcome {
    assert!((1..=4).contains(&max_worlds), "oracle bound is 1..=4");
    let atoms: Vec<String> = f.atoms().into_iter().collect();
    // Subformulas in evaluation order: children before parents.
    let mut subs: Vec<Formula> = f.subformulas().into_iter().collect();
    subs.sort_by_key(|g| g.node_count());
    let index_of = |g: &Formula| subs.iter().position(|h| h == g).unwrap();
    let child_idx: Vec<(usize, Option<usize>)> = subs
        .iter()
        .map(|g| match g {
            Formula::Atom(_) | Formula::Falsum => (0, None),
            Formula::Implies(a, b) => (index_of(a), Some(index_of(b))),
            Formula::Box_(a) => (index_of(a), None),
        })
        .collect();

    for n in 1..=max_worlds {
        let full: u32 = (1 << n) - 1;
        for rel in relations_on(n) {
            // successor masks per world
            let mut succ = vec![0u32; n];
            for &(a, b) in rel {
                succ[a] |= 1 << b;
            }
            let atom_bits = atoms.len() * n;
            for assign in 0u64..(1u64 << atom_bits) {
                // mask of worlds where each atom is true
                let atom_mask =
                    |ai: usize| -> u32 { ((assign >> (ai * n)) as u32) & full };
                let mut truth = vec![0u32; subs.len()];
                for (i, g) in subs.iter().enumerate() {
                    truth[i] = match g {
                        Formula::Atom(name) => {
                            let ai = atoms.iter().position(|a| a == name).unwrap();
                            atom_mask(ai)
                        }
                        Formula::Falsum => 0,
                        Formula::Implies(_, _) => {
                            let (ia, ib) = child_idx[i];
                            (!truth[ia] & full) | truth[ib.unwrap()]
                        }
                        Formula::Box_(_) => {
                            let (ia, _) = child_idx[i];
                            let body = truth[ia];
                            let mut m = 0u32;
                            for (w, &s) in succ.iter().enumerate() {
                                if s & !body & full == 0 {
                                    m |= 1 << w;
                                }
                            }
                            m
                        }
                    };
                }
                let root_truth = truth[subs.len() - 1];
                if root_truth != full {
                    let world = (0..n).find(|w| root_truth >> w & 1 == 0).unwrap();
                    let valuation = (0..n).map(|w| {
                        let set: BTreeSet<String> = atoms
                            .iter()
                            .enumerate()
                            .filter(|(ai, _)| atom_mask(*ai) >> w & 1 == 1)
                            .map(|(_, a)| a.clone())
                            .collect();
                        (w, set)
                    });
                    let model = KripkeModel::new(n, rel.iter().copied(), valuation)
                        .expect("enumerated relation is transitive irreflexive");
                    return SmallModelOutcome::Countermodel(model, world);
                }
            }
        }
    }
    SmallModelOutcome::NoneFound
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modal::formula::parse_formula;
    use crate::modal::kripke::eval_at;

    #[test]
    fn there_are_219_strict_orders_on_four_points() {
        assert_eq!(relations_on(1).len(), 1);
        assert_eq!(relations_on(2).len(), 3);
        assert_eq!(relations_on(3).len(), 19);
        assert_eq!(relations_on(4).len(), 219);
    }

    #[test]
    fn finds_the_one_world_countermodel_for_reflection() {
        let f = parse_formula("[]p -> p").unwrap();
        match find_countermodel(&f, 4) {
            SmallModelOutcome::Countermodel(model, world) => {
                assert_eq!(eval_at(&model, world, &f), Ok(false));
                assert_eq!(model.world_count(), 1);
            }
            SmallModelOutcome::NoneFound => panic!("expected a countermodel"),
        }
    }

    #[test]
    fn lob_axiom_has_no_small_countermodel() {
        let f = parse_formula("[]([]p -> p) -> []p").unwrap();
        assert!(matches!(
            find_countermodel(&f, 4),
            SmallModelOutcome::NoneFound
        ));
    }

    #[test]
    fn transitivity_axiom_has_no_small_countermodel() {
        let f = parse_formula("[]p -> [][]p").unwrap();
        assert!(matches!(
            find_countermodel(&f, 4),
            SmallModelOutcome::NoneFound
        ));
    }
}
