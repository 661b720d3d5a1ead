//! Exact minimum-cut primitives for the separation oracles.
//!
//! Everything works on small dense symmetric weight matrices with rational
//! entries; zero-weight pairs simply have no edge. Deterministic by
//! construction.

use crate::rational::Rat;
use num_traits::{Signed, Zero};
use std::collections::VecDeque;

/// Minimum `s`-`t` cut of an undirected weighted graph via augmenting-path
/// max-flow. Returns the cut value and the source side.
pub fn min_st_cut(weights: &[Vec<Rat>], s: usize, t: usize) -> (Rat, Vec<bool>) {
    let n = weights.len();
    assert!(s != t && s < n && t < n);
    // Undirected edge of weight w: residual capacity w in both directions.
    let mut cap = weights.to_vec();
    for (i, row) in cap.iter_mut().enumerate() {
        row[i] = Rat::zero();
    }
    let mut flow_value = Rat::zero();
    loop {
        // BFS for an augmenting path.
        let mut parent = vec![usize::MAX; n];
        parent[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if parent[v] == usize::MAX && cap[u][v].is_positive() {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[t] == usize::MAX {
            let side: Vec<bool> = (0..n).map(|v| parent[v] != usize::MAX).collect();
            return (flow_value, side);
        }
        let mut bottleneck: Option<Rat> = None;
        let mut v = t;
        while v != s {
            let u = parent[v];
            if bottleneck.as_ref().is_none_or(|b| cap[u][v] < *b) {
                bottleneck = Some(cap[u][v].clone());
            }
            v = u;
        }
        let aug = bottleneck.unwrap();
        let mut v = t;
        while v != s {
            let u = parent[v];
            cap[u][v] -= &aug;
            cap[v][u] += &aug;
            v = u;
        }
        flow_value += aug;
    }
}

/// Global minimum cut (Stoer-Wagner) of an undirected weighted graph on at
/// least two vertices. Returns the cut value and one side.
pub fn global_min_cut(weights: &[Vec<Rat>]) -> (Rat, Vec<bool>) {
    let n = weights.len();
    assert!(n >= 2);
    let mut w = weights.to_vec();
    // groups[i]: original vertices merged into node i.
    let mut groups: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut active: Vec<usize> = (0..n).collect();
    let mut best: Option<(Rat, Vec<bool>)> = None;

    while active.len() > 1 {
        // Maximum-adjacency order over the active nodes.
        let mut order = Vec::with_capacity(active.len());
        let mut in_a = vec![false; n];
        let mut key: Vec<Rat> = vec![Rat::zero(); n];
        for _ in 0..active.len() {
            let mut pick = usize::MAX;
            for &v in &active {
                if !in_a[v] && (pick == usize::MAX || key[v] > key[pick]) {
                    pick = v;
                }
            }
            in_a[pick] = true;
            order.push(pick);
            for &v in &active {
                if !in_a[v] {
                    key[v] += &w[pick][v];
                }
            }
        }
        let last = *order.last().unwrap();
        let cut_value = key[last].clone();
        let mut side = vec![false; n];
        for &orig in &groups[last] {
            side[orig] = true;
        }
        if best.as_ref().is_none_or(|(b, _)| cut_value < *b) {
            best = Some((cut_value, side));
        }
        // Merge the last two nodes of the order.
        let prev = order[order.len() - 2];
        let moved = std::mem::take(&mut groups[last]);
        groups[prev].extend(moved);
        for &v in &active {
            if v != prev && v != last {
                let add = w[last][v].clone();
                w[prev][v] += &add;
                w[v][prev] += add;
            }
        }
        active.retain(|&v| v != last);
    }

    let (value, side) = best.unwrap();
    (value, side)
}

/// Contracts vertices `a` and `b` into one node. Returns the reduced matrix
/// and, per original vertex, its node index in the reduced matrix.
pub fn contract_pair(weights: &[Vec<Rat>], a: usize, b: usize) -> (Vec<Vec<Rat>>, Vec<usize>) {
    let n = weights.len();
    assert!(a != b);
    let mut map = vec![usize::MAX; n];
    let mut next = 0usize;
    for v in 0..n {
        if v != b {
            map[v] = next;
            next += 1;
        }
    }
    map[b] = map[a];
    let m = n - 1;
    let mut out = vec![vec![Rat::zero(); m]; m];
    for u in 0..n {
        for v in (u + 1)..n {
            let (mu, mv) = (map[u], map[v]);
            if mu != mv && !weights[u][v].is_zero() {
                out[mu][mv] += &weights[u][v];
                out[mv][mu] += &weights[u][v];
            }
        }
    }
    (out, map)
}
