#![allow(dead_code)]

use proptest::prelude::*;
use ucover_core::{Entourage, FiniteSpace, SpaceMap};

pub fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i}")).collect()
}

/// A space carrying only indices; the metric is never consulted.
pub fn discrete_space(n: usize) -> FiniteSpace {
    let dist = (0..n).map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect()).collect();
    FiniteSpace::from_matrix(labels(n), dist).unwrap()
}

pub fn entourage_from_bits(n: usize, bits: &[bool]) -> Entourage {
    let mut k = 0;
    Entourage::from_fn(n, |_, _| {
        k += 1;
        bits[k - 1]
    })
}

/// Random entourage on exactly `n` points with edge density `p`.
pub fn entourage_on(n: usize, p: f64) -> impl Strategy<Value = Entourage> {
    proptest::collection::vec(proptest::bool::weighted(p), n * (n - 1) / 2)
        .prop_map(move |bits| entourage_from_bits(n, &bits))
}

pub fn entourage(min_n: usize, max_n: usize) -> impl Strategy<Value = Entourage> {
    (min_n..=max_n, 0.2f64..0.9).prop_flat_map(|(n, p)| entourage_on(n, p))
}

/// Nested ladder (coarsest first) built by cumulative unions from the
/// finest entry.
pub fn ladder_on(n: usize, len: usize) -> impl Strategy<Value = Vec<Entourage>> {
    proptest::collection::vec(entourage_on(n, 0.3), len).prop_map(|mut raw| {
        for i in (0..raw.len() - 1).rev() {
            raw[i] = raw[i].union(&raw[i + 1]).unwrap();
        }
        raw
    })
}

/// Nested ladder whose finest entry is an equivalence relation, so every
/// entry contains the square of some entry.
pub fn uniform_ladder_on(n: usize, len: usize) -> impl Strategy<Value = Vec<Entourage>> {
    (proptest::collection::vec(0..n, n), ladder_on(n, len - 1)).prop_map(move |(class, coarse)| {
        let finest = Entourage::from_fn(n, |i, j| class[i] == class[j]);
        let mut out: Vec<Entourage> = coarse.into_iter().map(|e| e.union(&finest).unwrap()).collect();
        out.push(finest);
        out
    })
}

pub fn map_on(n: usize, m: usize) -> impl Strategy<Value = SpaceMap> {
    proptest::collection::vec(0..m, n)
        .prop_map(move |assign| SpaceMap::new(discrete_space(n), discrete_space(m), assign).unwrap())
}

/// A chain of `len` points valid at `e`, starting at `start`, picked by
/// indices into neighbour lists.
pub fn walk(e: &Entourage, start: usize, picks: &[usize]) -> Vec<usize> {
    let mut seq = vec![start];
    for &p in picks {
        let last = *seq.last().unwrap();
        let nbrs: Vec<usize> = e.neighbors(last).collect();
        seq.push(nbrs[p % nbrs.len()]);
    }
    seq
}
