#![allow(dead_code)]

use kms_graph_lab::graph::{FiniteGraph, GraphBuilder};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Adjacency matrix with entries in `0..=max_mult`.
pub type Matrix = Vec<Vec<u64>>;

pub fn strongly_connected(a: &Matrix) -> bool {
    let n = a.len();
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for w in 0..n {
                let edge = if forward { a[v][w] } else { a[w][v] };
                if edge > 0 && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false) && (n > 1 || a[0][0] > 0)
}

/// Rejection-sampled strongly connected matrix on at most `max_n` vertices
/// with out-degree (counted with multiplicity) at most `max_out`.
pub fn random_matrix(rng: &mut ChaCha8Rng, max_n: usize, max_out: u64) -> Matrix {
    loop {
        let n = rng.random_range(1..=max_n);
        let p: f64 = rng.random_range(0.15..0.6);
        let mut a = vec![vec![0u64; n]; n];
        for row in a.iter_mut() {
            let mut budget = max_out;
            for x in row.iter_mut() {
                if budget > 0 && rng.random_bool(p) {
                    *x = rng.random_range(1..=budget.min(2));
                    budget -= *x;
                }
            }
        }
        if strongly_connected(&a) {
            return a;
        }
    }
}

pub fn to_graph(a: &Matrix) -> FiniteGraph {
    let mut b = GraphBuilder::new();
    for v in 0..a.len() {
        b.vertex(format!("v{v}"));
    }
    for (v, row) in a.iter().enumerate() {
        for (w, &k) in row.iter().enumerate() {
            if k > 0 {
                b.edges(format!("e{v}_{w}"), format!("v{v}"), format!("v{w}"), k);
            }
        }
    }
    b.build().expect("random graph is sink-free")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Lengths `1..=max_len` of closed walks at `v`, by boolean matrix powers.
pub fn closed_walk_lengths(a: &Matrix, v: usize, max_len: usize) -> Vec<usize> {
    let n = a.len();
    let mut cur: Vec<bool> = (0..n).map(|w| w == v).collect();
    let mut out = Vec::new();
    for len in 1..=max_len {
        let mut next = vec![false; n];
        for u in 0..n {
            if cur[u] {
                for w in 0..n {
                    if a[u][w] > 0 {
                        next[w] = true;
                    }
                }
            }
        }
        if next[v] {
            out.push(len);
        }
        cur = next;
    }
    out
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
