mod common;

use std::time::Instant;

use common::{large_index, mutate, osa_full_matrix, rng};
use rand::RngExt;
use semql_core::distance::ThresholdPolicy;
use semql_core::index::SimilarityHit;
use semql_core::normalize::normalize_value;

fn keyed(hits: Vec<SimilarityHit>) -> Vec<(String, usize, usize, usize)> {
    let mut v: Vec<_> = hits
        .into_iter()
        .map(|h| {
            (
                h.normalized,
                h.location.table,
                h.location.column,
                h.distance,
            )
        })
        .collect();
    v.sort();
    v
}

#[test]
fn blocking_never_misses_a_hit() {
    let (index, values) = large_index(11, 50_000);
    assert!(index.len() >= 50_000);
    let letters: Vec<char> = ('a'..='z').chain('0'..='9').collect();
    let mut r = rng(12);
    let policies = [ThresholdPolicy::LengthScaled, ThresholdPolicy::Fixed(2)];
    let started = Instant::now();
    let mut hits = 0;
    for i in 0..1_000 {
        let base = &values[r.random_range(0..values.len())];
        let probe = match i % 3 {
            0 => base.clone(),
            1 => mutate(&mut r, base, &letters, 1 + i % 3),
            _ => mutate(&mut r, "", &letters, 2 + i % 10),
        };
        let policy = &policies[i % 2];
        let fast = keyed(index.similarity_search(&probe, policy));
        let scan = keyed(index.similarity_scan(&probe, policy));
        assert_eq!(fast, scan, "probe {probe:?}");
        hits += fast.len();
        if i % 50 == 0 {
            // A second, independent route: the oracle distance over every value.
            let p = normalize_value(&probe);
            let limit = policy.threshold(p.chars().count());
            let mut oracle: Vec<String> = values
                .iter()
                .map(|v| normalize_value(v))
                .filter(|v| osa_full_matrix(&p, v) <= limit)
                .collect();
            oracle.sort();
            oracle.dedup();
            let mut got: Vec<String> = fast.iter().map(|h| h.0.clone()).collect();
            got.dedup();
            assert_eq!(got, oracle, "probe {probe:?}");
        }
    }
    assert!(hits > 1_000);
    eprintln!("1000 probes in {:?}", started.elapsed());
}
