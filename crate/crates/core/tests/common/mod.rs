#![allow(dead_code)]

pub mod decoder;

use o2onc::{CodingGraph, PacketSet, ReceiverState};
use rand::seq::SliceRandom;
use rand::Rng;

/// Receiver with random Has set (each packet with probability `has_prob`)
/// and its Wants set cut into random vertices of dimension `1..=max_dim`.
pub fn random_receiver<R: Rng>(
    rng: &mut R,
    id: usize,
    n: usize,
    max_dim: usize,
    has_prob: f64,
) -> ReceiverState {
    let has: PacketSet = (0..n).filter(|_| rng.gen_bool(has_prob)).collect();
    let mut wants: Vec<usize> = (0..n).filter(|p| !has.contains(*p)).collect();
    wants.shuffle(rng);
    let mut vertices = Vec::new();
    let mut rest = &wants[..];
    while !rest.is_empty() {
        let d = rng.gen_range(1..=max_dim).min(rest.len());
        vertices.push(rest[..d].iter().copied().collect());
        rest = &rest[d..];
    }
    ReceiverState::with_vertices(id, n, has, vertices, 0.1).unwrap()
}

pub fn random_states<R: Rng>(
    rng: &mut R,
    m: usize,
    n: usize,
    max_dim: usize,
    has_prob: f64,
) -> Vec<ReceiverState> {
    (0..m)
        .map(|i| random_receiver(rng, i, n, max_dim, has_prob))
        .collect()
}

/// Every nonempty clique, each listed once in ascending member order.
pub fn all_cliques(g: &CodingGraph) -> Vec<Vec<usize>> {
    fn grow(g: &CodingGraph, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        let start = cur.last().map_or(0, |&l| l + 1);
        for v in start..g.len() {
            if cur.iter().all(|&c| g.is_adjacent(c, v)) {
                cur.push(v);
                grow(g, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    for v in 0..g.len() {
        let mut cur = vec![v];
        grow(g, &mut cur, &mut out);
    }
    out
}

/// Cliques of exactly `k` vertices.
pub fn cliques_of_size(g: &CodingGraph, k: usize) -> Vec<Vec<usize>> {
    fn grow(g: &CodingGraph, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        let start = cur.last().map_or(0, |&l| l + 1);
        for v in start..g.len() {
            if cur.iter().all(|&c| g.is_adjacent(c, v)) {
                cur.push(v);
                grow(g, k, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    grow(g, k, &mut Vec::new(), &mut out);
    out
}
