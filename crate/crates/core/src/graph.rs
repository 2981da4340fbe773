//! Coding graphs built from pairwise vertex adjacency conditions.
//!
//! Every rule set here is pairwise: whether two vertices are joined depends
//! only on their packet sets and the Has sets of their two receivers.

use std::fmt::Write as _;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::model::{ReceiverState, Vertex};
use crate::packet_set::PacketSet;

/// Which adjacency conditions populate the edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeRules {
    /// Instantly decodable graph: same packet, or each packet held by the
    /// other receiver. Dimension-1 vertices only.
    IdncC1C2,
    /// Intersecting sets always adjacent; disjoint sets adjacent when each
    /// touches the other receiver's Has set.
    SimpleBc,
    /// Only the intersecting-sets half of [`EdgeRules::SimpleBc`].
    Bc1Only,
    /// The constrained conditions under which every clique admits a single
    /// benefiting combination.
    ConstrainedBc,
}

/// C1 / C2 for dimension-1 vertices.
pub fn adjacent_idnc(vi: &Vertex, vk: &Vertex, hi: &PacketSet, hk: &PacketSet) -> Result<bool> {
    for v in [vi, vk] {
        if v.dimension() != 1 {
            return Err(Error::DimensionViolation(v.packets));
        }
    }
    Ok(vi.packets == vk.packets || (vi.packets.is_subset(hk) && vk.packets.is_subset(hi)))
}

pub fn adjacent_simple(vi: &Vertex, vk: &Vertex, hi: &PacketSet, hk: &PacketSet) -> bool {
    let (x, y) = (&vi.packets, &vk.packets);
    x.intersects(y) || (x.intersects(hk) && y.intersects(hi))
}

/// Constrained condition for intersecting packet sets. `smaller` must not
/// exceed `larger` in dimension; `h_larger` is the Has set of `larger`'s
/// receiver.
pub fn adjacent_bc1star(
    smaller: &PacketSet,
    larger: &PacketSet,
    h_larger: &PacketSet,
) -> Result<bool> {
    if !smaller.intersects(larger) {
        return Err(Error::Precondition(format!(
            "BC1* needs intersecting sets, got {smaller} and {larger}"
        )));
    }
    let (dx, dy) = (smaller.len(), larger.len());
    if dx > dy {
        return Err(Error::Precondition(format!(
            "BC1* arguments out of order: |{smaller}| > |{larger}|"
        )));
    }
    Ok(if dx == 1 {
        smaller.is_subset(larger)
    } else if dx == dy {
        smaller.intersection_len(larger) + 1 >= dx
    } else {
        let unknown = smaller.difference(h_larger);
        unknown.intersection_len(larger) + 1 >= unknown.len()
    })
}

/// Constrained condition for disjoint packet sets: mutual Has containment.
pub fn adjacent_bc2star(vi: &Vertex, vk: &Vertex, hi: &PacketSet, hk: &PacketSet) -> Result<bool> {
    if vi.packets.intersects(&vk.packets) {
        return Err(Error::Precondition(format!(
            "BC2* needs disjoint sets, got {} and {}",
            vi.packets, vk.packets
        )));
    }
    Ok(vi.packets.is_subset(hk) && vk.packets.is_subset(hi))
}

/// Either constrained condition, whichever applies to the pair.
pub fn adjacent_constrained(vi: &Vertex, vk: &Vertex, hi: &PacketSet, hk: &PacketSet) -> bool {
    if vi.packets.intersects(&vk.packets) {
        let ok = if vi.dimension() <= vk.dimension() {
            adjacent_bc1star(&vi.packets, &vk.packets, hk)
        } else {
            adjacent_bc1star(&vk.packets, &vi.packets, hi)
        };
        ok.expect("ordered intersecting arguments")
    } else {
        vi.packets.is_subset(hk) && vk.packets.is_subset(hi)
    }
}

fn adjacent(
    rules: EdgeRules,
    vi: &Vertex,
    vk: &Vertex,
    hi: &PacketSet,
    hk: &PacketSet,
) -> Result<bool> {
    if vi.receiver == vk.receiver {
        return Ok(false);
    }
    Ok(match rules {
        EdgeRules::IdncC1C2 => adjacent_idnc(vi, vk, hi, hk)?,
        EdgeRules::SimpleBc => adjacent_simple(vi, vk, hi, hk),
        EdgeRules::Bc1Only => vi.packets.intersects(&vk.packets),
        EdgeRules::ConstrainedBc => adjacent_constrained(vi, vk, hi, hk),
    })
}

/// Vertex list plus a dense symmetric adjacency matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodingGraph {
    vertices: Vec<Vertex>,
    adjacency: Vec<FixedBitSet>,
    rules: EdgeRules,
}

impl CodingGraph {
    /// Graph with an explicit edge list. Edges between vertices of one
    /// receiver and self-loops are rejected.
    pub fn from_edges(
        vertices: Vec<Vertex>,
        edges: &[(usize, usize)],
        rules: EdgeRules,
    ) -> Result<Self> {
        let n = vertices.len();
        let mut adjacency = vec![FixedBitSet::with_capacity(n); n];
        for &(a, b) in edges {
            if a >= n || b >= n || vertices[a].receiver == vertices[b].receiver {
                return Err(Error::Precondition(format!("invalid edge ({a}, {b})")));
            }
            adjacency[a].insert(b);
            adjacency[b].insert(a);
        }
        Ok(Self {
            vertices,
            adjacency,
            rules,
        })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &Vertex {
        &self.vertices[v]
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn rules(&self) -> EdgeRules {
        self.rules
    }

    #[inline]
    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].contains(b)
    }

    /// Neighbor row of `v` as a bitset over vertex indices.
    pub fn neighbors(&self, v: usize) -> &FixedBitSet {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].count_ones(..)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency
            .iter()
            .map(|r| r.count_ones(..))
            .sum::<usize>()
            / 2
    }

    /// True if `members` are pairwise adjacent.
    pub fn is_clique(&self, members: &[usize]) -> bool {
        members
            .iter()
            .enumerate()
            .all(|(i, &a)| members[i + 1..].iter().all(|&b| self.is_adjacent(a, b)))
    }

    /// Text dump, one line per vertex:
    /// `index<TAB>receiver<TAB>packets<TAB>neighbor indices`.
    pub fn to_adjacency_text(&self) -> String {
        let mut out = format!(
            "# rules={:?} vertices={} edges={}\n",
            self.rules,
            self.len(),
            self.edge_count()
        );
        for (i, v) in self.vertices.iter().enumerate() {
            let nbrs: Vec<String> = self.adjacency[i].ones().map(|j| j.to_string()).collect();
            writeln!(
                out,
                "{i}\t{}\t{}\t{}",
                v.receiver,
                v.packets,
                nbrs.join(" ")
            )
            .unwrap();
        }
        out
    }
}

/// Builds the coding graph over all vertices of all receivers. Receiver ids
/// must equal their position in `states`.
pub fn build_graph(states: &[ReceiverState], rules: EdgeRules) -> Result<CodingGraph> {
    for (i, s) in states.iter().enumerate() {
        if s.id() != i {
            return Err(Error::Precondition(format!(
                "receiver at position {i} has id {}",
                s.id()
            )));
        }
    }
    let vertices: Vec<Vertex> = states.iter().flat_map(|s| s.vertices()).collect();
    let has: Vec<PacketSet> = vertices.iter().map(|v| states[v.receiver].has()).collect();
    let n = vertices.len();
    let mut adjacency = vec![FixedBitSet::with_capacity(n); n];
    for a in 0..n {
        for b in a + 1..n {
            if adjacent(rules, &vertices[a], &vertices[b], &has[a], &has[b])? {
                adjacency[a].insert(b);
                adjacency[b].insert(a);
            }
        }
    }
    Ok(CodingGraph {
        vertices,
        adjacency,
        rules,
    })
}

/// Brute-force search for a combination that decodes or aggregates every
/// listed vertex (each counted against its own receiver). Returns the first
/// witness in increasing bitmask order.
pub fn exists_benefiting_combination(
    vertices: &[Vertex],
    states: &[ReceiverState],
) -> Result<Option<PacketSet>> {
    const MAX_ENUMERABLE: usize = 20;
    let n = states.iter().map(|s| s.frame_size()).max().unwrap_or(0);
    if n > MAX_ENUMERABLE {
        return Err(Error::CapacityExceeded(n));
    }
    let mut targets = Vec::with_capacity(vertices.len());
    for v in vertices {
        let s = states
            .get(v.receiver)
            .ok_or_else(|| Error::Precondition(format!("no receiver {}", v.receiver)))?;
        let idx = s.find_vertex(&v.packets).ok_or_else(|| {
            Error::Precondition(format!(
                "receiver {} has no vertex {}",
                v.receiver, v.packets
            ))
        })?;
        targets.push((s, idx));
    }
    for mask in 1u32..(1u32 << n) {
        let combo: PacketSet = (0..n).filter(|&p| mask >> p & 1 == 1).collect();
        if targets
            .iter()
            .all(|(s, idx)| s.classify_unchecked(&combo).benefits(*idx))
        {
            return Ok(Some(combo));
        }
    }
    Ok(None)
}
