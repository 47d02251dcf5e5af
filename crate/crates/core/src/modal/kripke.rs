//! Finite Kripke models with the frame conditions for provability logic:
//! a transitive, irreflexive accessibility relation.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::formula::Formula;

pub type WorldId = usize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("relation contains reflexive edge at world {0}")]
    Reflexive(WorldId),
    #[error("relation is not transitive: {0} -> {1} -> {2} but no {0} -> {2}")]
    NotTransitive(WorldId, WorldId, WorldId),
    #[error("edge references unknown world {0}")]
    UnknownWorld(WorldId),
}

/// A finite Kripke model. Construction enforces that the relation is
/// transitive and irreflexive, so every value of this type is a legal
/// frame for the logic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KripkeModel {
    worlds: usize,
    edges: BTreeSet<(WorldId, WorldId)>,
    valuation: BTreeMap<WorldId, BTreeSet<String>>,
}

impl KripkeModel {
    pub fn new(
        worlds: usize,
        edges: impl IntoIterator<Item = (WorldId, WorldId)>,
        valuation: impl IntoIterator<Item = (WorldId, BTreeSet<String>)>,
    ) -> Result<Self, ModelError> {
        let edges: BTreeSet<(WorldId, WorldId)> = edges.into_iter().collect();
        for &(a, b) in &edges {
            if a >= worlds {
                return Err(ModelError::UnknownWorld(a));
            }
            if b >= worlds {
                return Err(ModelError::UnknownWorld(b));
            }
            if a == b {
                return Err(ModelError::Reflexive(a));
            }
        }
        for &(a, b) in &edges {
            for &(c, d) in &edges {
                if b == c && !edges.contains(&(a, d)) {
                    return Err(ModelError::NotTransitive(a, b, d));
                }
            }
        }
        let valuation = valuation
            .into_iter()
            .filter(|(w, _)| *w < worlds)
            .collect();
        Ok(KripkeModel {
            worlds,
            edges,
            valuation,
        })
    }

    pub fn world_count(&self) -> usize {
        self.worlds
    }

    pub fn contains_world(&self, w: WorldId) -> bool {
        w < self.worlds
    }

    pub fn successors(&self, w: WorldId) -> impl Iterator<Item = WorldId> + '_ {
        self.edges
            .range((w, 0)..(w, usize::MAX))
            .map(|&(_, b)| b)
    }

    pub fn edges(&self) -> impl Iterator<Item = (WorldId, WorldId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn atom_true_at(&self, w: WorldId, atom: &str) -> bool {
        self.valuation.get(&w).is_some_and(|s| s.contains(atom))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown world id {0}")]
pub struct UnknownWorld(pub WorldId);

/// Truth of `f` at `world`, by structural recursion. A boxed formula is true
/// at `w` exactly when its body holds at every successor of `w`.
pub fn eval_at(model: &KripkeModel, world: WorldId, f: &Formula) -> Result<bool, UnknownWorld> {
    if !model.contains_world(world) {
        return Err(UnknownWorld(world));
    }
    Ok(eval_unchecked(model, world, f))
}

fn eval_unchecked(model: &KripkeModel, world: WorldId, f: &Formula) -> bool {
    match f {
        Formula::Atom(name) => model.atom_true_at(world, name),
        Formula::Falsum => false,
        Formula::Implies(a, b) => {
            !eval_unchecked(model, world, a) || eval_unchecked(model, world, b)
        }
        Formula::Box_(body) => model
            .successors(world)
            .all(|v| eval_unchecked(model, v, body)),
    }
}
