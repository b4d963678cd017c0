//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line with the measured quantities. Run with `--nocapture` to see the
//! lines for passing criteria too.

use ddescent::report::*;

fn check(result: CriterionResult) {
    println!("{}", result.line());
    assert!(result.passed, "{}", result.line());
}

#[test]
fn criterion_01_variance_formula_matches_exact_tables() {
    check(criterion_01_variance_formula());
}

#[test]
fn criterion_02_d1_variance_is_n_plus_1_over_12() {
    check(criterion_02_d1_variance_identity());
}

#[test]
fn criterion_03_enumeration_matches_both_oracles() {
    check(criterion_03_oracle_equivalence());
}

#[test]
fn criterion_04_pair_class_formulas_match_exhaustive_tally() {
    check(criterion_04_pair_class_formulas());
}

#[test]
fn criterion_05_degree_bound_holds_and_interior_maximum_is_pinned() {
    check(criterion_05_degree_bound());
}

#[test]
fn criterion_06_every_exact_table_is_unimodal() {
    check(criterion_06_unimodality());
}

#[test]
fn criterion_07_bound_vanishes_at_m3_but_not_m2() {
    check(criterion_07_janson_condition());
}

#[test]
fn criterion_08_ks_shrinks_with_n_at_fixed_d() {
    check(criterion_08_normality_fixed_d());
}

#[test]
fn criterion_09_ks_non_increasing_with_growing_d() {
    check(criterion_09_normality_growing_d());
}

#[test]
fn criterion_10_worker_count_determinism() {
    check(criterion_10_determinism());
}
