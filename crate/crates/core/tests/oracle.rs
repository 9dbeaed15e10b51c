mod common;

#[test]
fn random_programs_match_reference_interpreter() {
    let run = common::oracle_equivalence(0x04ac1e, 20, 500);
    assert!(run.instructions >= 10_000);
    assert!(run.uncovered.is_empty(), "never generated: {:?}", run.uncovered);
    assert!(run.mismatches.is_empty(), "{:#?}", run.mismatches);
}
