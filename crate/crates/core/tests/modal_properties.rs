//! Property tests for the provability-logic engine: parser round-trips,
//! tableau-vs-oracle agreement, and the closure laws of the validity
//! relation over a generated corpus.

use counterfact_core::modal::corpus::{check_agreement, formula_corpus};
use counterfact_core::modal::formula::{parse_formula, Formula};
use counterfact_core::modal::tableau::gl_valid;
use proptest::prelude::*;

fn arb_formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        "[a-d]".prop_map(Formula::atom),
        Just(Formula::falsum()),
        Just(Formula::truth()),
    ];
    leaf.prop_recursive(5, 32, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            inner.clone().prop_map(Formula::neg),
            inner.clone().prop_map(Formula::boxed),
            inner.prop_map(Formula::diamond),
        ]
    })
}

proptest! {
    #[test]
    fn printer_parser_round_trip(f in arb_formula()) {
        let printed = f.to_string();
        let reparsed = parse_formula(&printed).unwrap();
        prop_assert_eq!(reparsed, f, "printed form: {}", printed);
    }
}

#[test]
fn corpus_agreement_small_slice() {
    // The full 500-formula sweep runs in the verification suite; this keeps
    // a fast regression net in the unit run.
    for f in formula_corpus(120, 2027) {
        check_agreement(&f).unwrap();
    }
}

#[test]
fn lob_rule_closure_on_corpus() {
    for g in formula_corpus(120, 31) {
        let hyp = Formula::implies(Formula::boxed(g.clone()), g.clone());
        if gl_valid(&hyp).unwrap().is_valid() {
            assert!(
                gl_valid(&Formula::boxed(g.clone())).unwrap().is_valid(),
                "provability fixed point rule failed for {g}"
            );
        }
    }
}

#[test]
fn necessitation_closure_on_corpus() {
    for f in formula_corpus(120, 47) {
        if gl_valid(&f).unwrap().is_valid() {
            assert!(
                gl_valid(&Formula::boxed(f.clone())).unwrap().is_valid(),
                "necessitation failed for {f}"
            );
        }
    }
}
