mod common;

use common::{mutate, osa_full_matrix, random_string, rng, ALPHABET};
use proptest::prelude::*;
use semql_core::distance::{damerau_levenshtein, damerau_levenshtein_bounded};

#[test]
fn matches_full_matrix_oracle_on_random_pairs() {
    let mut r = rng(7);
    let mut mismatches = Vec::new();
    for i in 0..10_000 {
        let a = random_string(&mut r, 20, &ALPHABET);
        let b = if i % 2 == 0 {
            random_string(&mut r, 20, &ALPHABET)
        } else {
            let edits = 1 + i % 4;
            let mut m = mutate(&mut r, &a, &ALPHABET, edits);
            m.truncate(20);
            m
        };
        let d = damerau_levenshtein(&a, &b);
        if d != osa_full_matrix(&a, &b) {
            mismatches.push((a.clone(), b.clone()));
        }
        assert_eq!(d == 0, a == b, "identity: {a:?} {b:?}");
        assert_eq!(d, damerau_levenshtein(&b, &a), "symmetry: {a:?} {b:?}");
    }
    assert!(
        mismatches.is_empty(),
        "{} mismatches, first {:?}",
        mismatches.len(),
        mismatches.first()
    );
}

#[test]
fn known_values() {
    assert_eq!(damerau_levenshtein("ab", "ba"), 1);
    assert_eq!(damerau_levenshtein("Frence", "France"), 1);
    assert_eq!(damerau_levenshtein("", "abc"), 3);
    // Optimal string alignment never edits a transposed pair again.
    assert_eq!(damerau_levenshtein("ca", "abc"), 3);
}

proptest! {
    #[test]
    fn agrees_with_oracle(a in "[ab ]{0,12}", b in "[ab ]{0,12}") {
        prop_assert_eq!(damerau_levenshtein(&a, &b), osa_full_matrix(&a, &b));
    }

    #[test]
    fn bounded_form_is_exact_within_its_bound(a in "[abc]{0,10}", b in "[abc]{0,10}", max in 0usize..6) {
        let av: Vec<char> = a.chars().collect();
        let bv: Vec<char> = b.chars().collect();
        let d = osa_full_matrix(&a, &b);
        let got = damerau_levenshtein_bounded(&av, &bv, max);
        prop_assert_eq!(got, (d <= max).then_some(d));
    }

    #[test]
    fn metric_properties(a in "\\PC{0,10}", b in "\\PC{0,10}") {
        let d = damerau_levenshtein(&a, &b);
        prop_assert_eq!(d, damerau_levenshtein(&b, &a));
        prop_assert_eq!(d == 0, a == b);
        prop_assert!(d <= a.chars().count().max(b.chars().count()));
    }
}
