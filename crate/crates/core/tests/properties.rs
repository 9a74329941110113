mod common;

use common::props;

#[test]
fn canonicalize_is_idempotent() {
    props::canonicalize_idempotent().unwrap();
}

#[test]
fn merge_is_idempotent() {
    props::merge_idempotent().unwrap();
}

#[test]
fn merge_commutes_on_disjoint_keys() {
    props::merge_commutes_on_disjoint_keys().unwrap();
}

#[test]
fn self_assessment_is_all_match() {
    props::self_assessment_matches().unwrap();
}

#[test]
fn merged_kb_contains_delta() {
    props::delta_absorbed().unwrap();
}

#[test]
fn term_equivalence_is_reflexive_and_symmetric() {
    props::terms_equivalence_reflexive_symmetric().unwrap();
}
