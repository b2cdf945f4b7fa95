//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use semql_core::graph::{JoinEdge, SchemaGraph};
use semql_core::index::{ValueIndex, ValueLocation};
use semql_core::sqlite::Cell;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Optimal string alignment distance, filled as the textbook full matrix.
pub fn osa_full_matrix(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let (n, m) = (a.len(), b.len());
    let mut d = vec![vec![0usize; m + 1]; n + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=m {
        d[0][j] = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            let mut best = (d[i - 1][j] + 1)
                .min(d[i][j - 1] + 1)
                .min(d[i - 1][j - 1] + cost);
            if i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1] {
                best = best.min(d[i - 2][j - 2] + 1);
            }
            d[i][j] = best;
        }
    }
    d[n][m]
}

/// Random string over a small alphabet so that pairs share structure.
pub fn random_string(rng: &mut StdRng, max_len: usize, alphabet: &[char]) -> String {
    let len = rng.random_range(0..=max_len);
    (0..len)
        .map(|_| alphabet[rng.random_range(0..alphabet.len())])
        .collect()
}

/// `s` with a few random edits, so near pairs are common.
pub fn mutate(rng: &mut StdRng, s: &str, alphabet: &[char], edits: usize) -> String {
    let mut v: Vec<char> = s.chars().collect();
    for _ in 0..edits {
        let c = alphabet[rng.random_range(0..alphabet.len())];
        match rng.random_range(0..4) {
            0 if !v.is_empty() => {
                let i = rng.random_range(0..v.len());
                v[i] = c;
            }
            1 => {
                let i = rng.random_range(0..=v.len());
                v.insert(i, c);
            }
            2 if !v.is_empty() => {
                let i = rng.random_range(0..v.len());
                v.remove(i);
            }
            _ if v.len() >= 2 => {
                let i = rng.random_range(0..v.len() - 1);
                v.swap(i, i + 1);
            }
            _ => v.push(c),
        }
    }
    v.into_iter().collect()
}

pub const ALPHABET: [char; 8] = ['a', 'b', 'c', 'd', 'e', 'A', '1', ' '];

/// An index of `n` distinct random values spread over a few columns.
pub fn large_index(seed: u64, n: usize) -> (ValueIndex, Vec<String>) {
    let letters: Vec<char> = ('a'..='z').chain('0'..='9').collect();
    let mut r = rng(seed);
    let mut seen = BTreeSet::new();
    while seen.len() < n {
        let len = r.random_range(0..=13);
        // A leading letter keeps values from normalizing as numbers.
        let mut s = String::from(letters[r.random_range(0..26)]);
        s.extend((0..len).map(|_| letters[r.random_range(0..letters.len())]));
        seen.insert(s);
    }
    let values: Vec<String> = seen.into_iter().collect();
    let locs = values.iter().enumerate().map(|(i, v)| ValueLocation {
        table: i % 3,
        column: 1 + i % 7,
        raw: Cell::Text(v.clone()),
    });
    (ValueIndex::from_values("synthetic", locs), values)
}

pub fn bfs_distance(g: &SchemaGraph, from: usize, to: usize) -> Option<usize> {
    let mut dist = vec![usize::MAX; g.vertices];
    dist[from] = 0;
    let mut q = VecDeque::from([from]);
    while let Some(v) = q.pop_front() {
        for (w, _) in g.neighbours(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                q.push_back(w);
            }
        }
    }
    (dist[to] != usize::MAX).then_some(dist[to])
}

fn connected(g: &SchemaGraph, set: u32) -> bool {
    let Some(start) = (0..g.vertices).find(|v| set & (1 << v) != 0) else {
        return true;
    };
    let mut seen = 1u32 << start;
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for (w, _) in g.neighbours(v) {
            if set & (1 << w) != 0 && seen & (1 << w) == 0 {
                seen |= 1 << w;
                stack.push(w);
            }
        }
    }
    seen == set
}

/// Edges of a minimum Steiner tree, by trying every vertex subset.
pub fn brute_force_steiner(g: &SchemaGraph, terminals: &BTreeSet<usize>) -> Option<usize> {
    assert!(g.vertices <= 16);
    let need: u32 = terminals.iter().map(|t| 1u32 << t).sum();
    (0u32..1 << g.vertices)
        .filter(|s| s & need == need && connected(g, *s))
        .map(|s| s.count_ones() as usize - 1)
        .min()
}

/// A random graph; each edge carries distinct fake column ids.
pub fn random_graph(rng: &mut StdRng, vertices: usize, edge_p: f64) -> SchemaGraph {
    let mut edges = Vec::new();
    for a in 0..vertices {
        for b in a + 1..vertices {
            if rng.random_bool(edge_p) {
                let k = edges.len();
                edges.push(JoinEdge {
                    table_a: a,
                    table_b: b,
                    column_a: 1 + 2 * k,
                    column_b: 2 + 2 * k,
                });
            }
        }
    }
    SchemaGraph::new(vertices, edges)
}

/// Every subset of `0..n` with at least `min` members.
pub fn subsets(n: usize, min: usize) -> Vec<BTreeSet<usize>> {
    (0u32..1 << n)
        .filter(|s| s.count_ones() as usize >= min)
        .map(|s| (0..n).filter(|v| s & (1 << v) != 0).collect())
        .collect()
}
