//! Provability logic: formulas, Kripke semantics, a validity decision with
//! countermodel extraction, and bounded Hilbert-style proof search.

pub mod corpus;
pub mod formula;
pub mod kripke;
pub mod proof_check;
pub mod proofs;
pub mod smallmodel;
pub mod tableau;

pub use formula::{parse_formula, Formula, ParseError};
pub use kripke::{eval_at, KripkeModel, ModelError, UnknownWorld, WorldId};
pub use proofs::{enumerate_proofs, Axiom, AxiomSet, Justification, Proof, ProofLine};
pub use proof_check::{check_proof, ProofCheckError};
pub use tableau::{gl_satisfiable, gl_valid, gl_valid_budget, BudgetExceeded, Validity};
