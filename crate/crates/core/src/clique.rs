//! Served-clique selection: exact maximum-weight search and the iterative
//! modified-weight heuristic.

use std::cmp::Ordering;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::graph::CodingGraph;
use crate::model::ReceiverState;

/// Default vertex cap for [`max_weight_clique_exact`].
pub const DEFAULT_EXACT_CAP: usize = 80;

#[derive(Clone, Debug)]
pub struct WeightedGraph<'g> {
    graph: &'g CodingGraph,
    weights: Vec<f64>,
}

impl<'g> WeightedGraph<'g> {
    pub fn new(graph: &'g CodingGraph, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != graph.len() {
            return Err(Error::Precondition(format!(
                "{} weights for {} vertices",
                weights.len(),
                graph.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::Precondition(format!("invalid vertex weight {w}")));
        }
        Ok(Self { graph, weights })
    }

    /// Weights the graph with a per-vertex policy.
    pub fn with_policy(
        graph: &'g CodingGraph,
        states: &[ReceiverState],
        policy: &dyn WeightPolicy,
    ) -> Result<Self> {
        let weights = graph
            .vertices()
            .iter()
            .map(|v| policy.weight(&states[v.receiver], &v.packets))
            .collect();
        Self::new(graph, weights)
    }

    pub fn graph(&self) -> &'g CodingGraph {
        self.graph
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total(&self, clique: &Clique) -> f64 {
        clique.members.iter().map(|&v| self.weights[v]).sum()
    }
}

/// Raw vertex weights.
pub trait WeightPolicy: Sync {
    fn weight(&self, receiver: &ReceiverState, packets: &crate::PacketSet) -> f64;
}

/// Expected remaining beneficial slots of the vertex's receiver:
/// `remaining vertices / (1 - epsilon)`. Favors receivers that bottleneck
/// the completion time.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExpectedRemainingSlots;

impl WeightPolicy for ExpectedRemainingSlots {
    fn weight(&self, receiver: &ReceiverState, _packets: &crate::PacketSet) -> f64 {
        receiver.remaining() as f64 / (1.0 - receiver.epsilon())
    }
}

/// Uniform unit weights.
#[derive(Clone, Copy, Debug, Default)]
pub struct UnitWeight;

impl WeightPolicy for UnitWeight {
    fn weight(&self, _: &ReceiverState, _: &crate::PacketSet) -> f64 {
        1.0
    }
}

/// Sorted list of vertex indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Clique {
    members: Vec<usize>,
}

impl Clique {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Self { members }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

// Relative slack for float weight ties.
const TIE_EPS: f64 = 1e-9;

fn tie_tol(a: f64, b: f64) -> f64 {
    TIE_EPS * a.abs().max(b.abs()).max(1.0)
}

/// Orders candidate cliques: heavier first, then larger, then the
/// lexicographically smaller sorted member list.
fn better(wa: f64, a: &[usize], wb: f64, b: &[usize]) -> bool {
    if (wa - wb).abs() > tie_tol(wa, wb) {
        return wa > wb;
    }
    match a.len().cmp(&b.len()) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => a < b,
    }
}

/// Maximum-weight clique by branch and bound over a degeneracy ordering.
pub fn max_weight_clique_exact(wg: &WeightedGraph<'_>) -> Result<Clique> {
    max_weight_clique_exact_capped(wg, DEFAULT_EXACT_CAP)
}

pub fn max_weight_clique_exact_capped(wg: &WeightedGraph<'_>, cap: usize) -> Result<Clique> {
    let g = wg.graph;
    let n = g.len();
    if n > cap {
        return Err(Error::SizeCapExceeded { vertices: n, cap });
    }
    if n == 0 {
        return Ok(Clique::default());
    }
    let order = degeneracy_order(g);
    // position in the search order
    let mut rank = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        rank[v] = i;
    }
    // Candidates of v: neighbors that come later in the order.
    let later: Vec<FixedBitSet> = (0..n)
        .map(|v| {
            let mut s = FixedBitSet::with_capacity(n);
            for u in g.neighbors(v).ones() {
                if rank[u] > rank[v] {
                    s.insert(u);
                }
            }
            s
        })
        .collect();

    let mut search = Search {
        weights: &wg.weights,
        later: &later,
        current: Vec::new(),
        best: Vec::new(),
        best_weight: 0.0,
    };
    let mut all = FixedBitSet::with_capacity(n);
    all.insert_range(..);
    search.expand(&all, 0.0);
    Ok(Clique::new(search.best))
}

struct Search<'a> {
    weights: &'a [f64],
    later: &'a [FixedBitSet],
    current: Vec<usize>,
    best: Vec<usize>,
    best_weight: f64,
}

impl Search<'_> {
    fn consider(&mut self, weight: f64) {
        let mut sorted = self.current.clone();
        sorted.sort_unstable();
        if better(weight, &sorted, self.best_weight, &self.best) {
            self.best = sorted;
            self.best_weight = weight;
        }
    }

    fn expand(&mut self, candidates: &FixedBitSet, weight: f64) {
        self.consider(weight);
        let bound: f64 = weight + candidates.ones().map(|v| self.weights[v]).sum::<f64>();
        if bound < self.best_weight - tie_tol(bound, self.best_weight) {
            return;
        }
        for v in candidates.ones() {
            let mut next = candidates.clone();
            next.intersect_with(&self.later[v]);
            self.current.push(v);
            self.expand(&next, weight + self.weights[v]);
            self.current.pop();
        }
    }
}

/// Repeatedly removes a minimum-degree vertex; ties go to the smaller index.
fn degeneracy_order(g: &CodingGraph) -> Vec<usize> {
    let n = g.len();
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut removed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !removed[v])
            .min_by_key(|&v| (deg[v], v))
            .expect("vertex left");
        removed[v] = true;
        order.push(v);
        for u in g.neighbors(v).ones() {
            if !removed[u] {
                deg[u] -= 1;
            }
        }
    }
    order
}

/// `w_v * sum of w_u over neighbors u of v inside subgraph`, for every
/// vertex `v` of the graph.
pub fn modified_weights(wg: &WeightedGraph<'_>, subgraph: &FixedBitSet) -> Vec<f64> {
    (0..wg.graph.len())
        .map(|v| {
            let s: f64 = wg
                .graph
                .neighbors(v)
                .intersection(subgraph)
                .map(|u| wg.weights[u])
                .sum();
            wg.weights[v] * s
        })
        .collect()
}

/// Iterative heuristic: pick the vertex of largest modified weight, shrink
/// to its neighbors within the current subgraph, repeat until nothing is
/// left. Ties go to the larger raw weight, then the smaller index.
pub fn greedy_clique_search(wg: &WeightedGraph<'_>) -> Clique {
    let n = wg.graph.len();
    let mut sub = FixedBitSet::with_capacity(n);
    sub.insert_range(..);
    let mut picked = Vec::new();
    while !sub.is_clear() {
        let omega = modified_weights(wg, &sub);
        let mut best: Option<usize> = None;
        for v in sub.ones() {
            best = match best {
                None => Some(v),
                Some(b) => {
                    let key = |x: usize| (omega[x], wg.weights[x]);
                    let (ov, rv) = key(v);
                    let (ob, rb) = key(b);
                    if ov > ob || (ov == ob && rv > rb) {
                        Some(v)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        let v = best.expect("nonempty subgraph");
        picked.push(v);
        sub.intersect_with(wg.graph.neighbors(v));
    }
    Clique::new(picked)
}
