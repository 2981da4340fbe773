//! From a served clique to a coded packet, and from a broadcast to receiver
//! updates.

use crate::clique::Clique;
use crate::error::{Error, Result};
use crate::gf_oracle::GfEquation;
use crate::graph::CodingGraph;
use crate::model::{Classification, ReceiverState, Vertex};
use crate::packet_set::PacketSet;

/// Per-receiver outcome of one broadcast slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Reception {
    Erased,
    Received(Classification),
}

impl Reception {
    pub fn is_beneficial(&self) -> bool {
        matches!(self, Self::Received(c) if c.is_beneficial())
    }
}

/// Clique-member sub-combinations by repeated smallest-dimension pick.
///
/// Each round takes the remaining vertex of smallest dimension (ties: lower
/// receiver index, then lower graph index), emits its whole packet set, and
/// drops every remaining vertex whose packet set meets it.
pub fn sub_combinations(clique: &Clique, graph: &CodingGraph) -> Vec<PacketSet> {
    let mut left: Vec<Vertex> = clique.members().iter().map(|&v| *graph.vertex(v)).collect();
    let mut parts = Vec::new();
    while let Some(min) = left
        .iter()
        .min_by_key(|v| (v.dimension(), v.receiver))
        .copied()
    {
        left.retain(|v| !v.packets.intersects(&min.packets));
        parts.push(min.packets);
    }
    parts
}

/// Node budget for [`search_combination`] inside [`determine_combination`].
pub const DEFAULT_SEARCH_BUDGET: u64 = 1 << 20;

/// Combination serving every vertex of a constrained-rule clique.
///
/// The union of [`sub_combinations`] is tried first. A later round can put
/// packets outside `x ∪ H` of a vertex served in an earlier round (two
/// intersecting vertices are joined by BC1*, not BC2*), so the union is
/// re-checked; when it fails, [`search_combination`] looks for a serving
/// combination inside the clique's packets. [`Error::ImproperClique`] means
/// neither found one.
pub fn determine_combination(
    clique: &Clique,
    graph: &CodingGraph,
    states: &[ReceiverState],
) -> Result<PacketSet> {
    if clique.is_empty() {
        return Err(Error::Precondition("empty clique".into()));
    }
    let combo = sub_combinations(clique, graph)
        .iter()
        .fold(PacketSet::new(), |acc, p| acc.union(p));
    match check_serves(&combo, clique, graph, states) {
        Ok(()) => Ok(combo),
        Err(Error::ImproperClique { .. }) => {
            match search_combination(clique, graph, states, DEFAULT_SEARCH_BUDGET)? {
                Some(found) => Ok(found),
                None => check_serves(&combo, clique, graph, states).map(|_| combo),
            }
        }
        Err(e) => Err(e),
    }
}

struct Member {
    has: PacketSet,
    own: PacketSet,
    others: Vec<PacketSet>,
}

impl Member {
    /// Which vertex of this receiver holds `p`: `None` if known, `Some(0)`
    /// for the member itself, `Some(i + 1)` for its i-th other vertex.
    fn slot(&self, p: usize) -> Option<usize> {
        if self.has.contains(p) {
            None
        } else if self.own.contains(p) {
            Some(0)
        } else {
            self.others
                .iter()
                .position(|o| o.contains(p))
                .map(|i| i + 1)
        }
    }
}

/// Depth-first search for a combination that decodes or aggregates every
/// clique member. Only packets of member packet sets are considered: any
/// other packet is known to or foreign to every member and can only widen
/// its unknown span. Returns `None` if the search space is exhausted or
/// more than `budget` nodes are visited.
pub fn search_combination(
    clique: &Clique,
    graph: &CodingGraph,
    states: &[ReceiverState],
    budget: u64,
) -> Result<Option<PacketSet>> {
    let mut members = Vec::with_capacity(clique.len());
    for &m in clique.members() {
        let v = graph.vertex(m);
        let s = &states[v.receiver];
        if s.find_vertex(&v.packets).is_none() {
            return Err(Error::Precondition(format!(
                "receiver {} has no vertex {}",
                v.receiver, v.packets
            )));
        }
        members.push(Member {
            has: s.has(),
            own: v.packets,
            others: s
                .vertex_sets()
                .iter()
                .filter(|x| **x != v.packets)
                .copied()
                .collect(),
        });
    }
    let pool = members
        .iter()
        .fold(PacketSet::new(), |acc, m| acc.union(&m.own));
    // Packets shared by more members first.
    let mut order: Vec<usize> = pool.iter().collect();
    order.sort_by_key(|&p| {
        (
            std::cmp::Reverse(members.iter().filter(|m| m.own.contains(p)).count()),
            p,
        )
    });
    let slots: Vec<Vec<Option<usize>>> = order
        .iter()
        .map(|&p| members.iter().map(|m| m.slot(p)).collect())
        .collect();
    // open[i][k]: packets of member k's own set still undecided after
    // position i in the order.
    let mut open = vec![vec![0u32; members.len()]; order.len() + 1];
    for i in (0..order.len()).rev() {
        for k in 0..members.len() {
            open[i][k] = open[i + 1][k] + u32::from(slots[i][k] == Some(0));
        }
    }

    struct Dfs<'a> {
        slots: &'a [Vec<Option<usize>>],
        open: &'a [Vec<u32>],
        order: &'a [usize],
        nodes: u64,
        budget: u64,
    }

    #[derive(Clone)]
    struct Progress {
        hit: Vec<bool>,
        other: Vec<Option<usize>>,
    }

    impl Dfs<'_> {
        fn run(&mut self, i: usize, st: &Progress, chosen: &mut PacketSet) -> bool {
            self.nodes += 1;
            if self.nodes > self.budget {
                return false;
            }
            if st
                .hit
                .iter()
                .enumerate()
                .any(|(k, &h)| !h && self.open[i][k] == 0)
            {
                return false;
            }
            if i == self.order.len() {
                return true;
            }
            // include
            let mut next = st.clone();
            let mut ok = true;
            for (k, s) in self.slots[i].iter().enumerate() {
                match *s {
                    None => {}
                    Some(0) => next.hit[k] = true,
                    Some(o) => match next.other[k] {
                        None => next.other[k] = Some(o),
                        Some(prev) if prev == o => {}
                        Some(_) => {
                            ok = false;
                            break;
                        }
                    },
                }
            }
            if ok {
                chosen.insert(self.order[i]);
                if self.run(i + 1, &next, chosen) {
                    return true;
                }
                chosen.remove(self.order[i]);
            }
            // exclude
            self.run(i + 1, st, chosen)
        }
    }

    let mut dfs = Dfs {
        slots: &slots,
        open: &open,
        order: &order,
        nodes: 0,
        budget,
    };
    let start = Progress {
        hit: vec![false; members.len()],
        other: vec![None; members.len()],
    };
    let mut chosen = PacketSet::new();
    if dfs.run(0, &start, &mut chosen) {
        check_serves(&chosen, clique, graph, states)?;
        Ok(Some(chosen))
    } else {
        Ok(None)
    }
}

/// Errors with [`Error::ImproperClique`] on the first clique member that
/// `combo` does not decode or aggregate.
pub fn check_serves(
    combo: &PacketSet,
    clique: &Clique,
    graph: &CodingGraph,
    states: &[ReceiverState],
) -> Result<()> {
    for &m in clique.members() {
        let v = graph.vertex(m);
        let state = &states[v.receiver];
        let idx = state.find_vertex(&v.packets).ok_or_else(|| {
            Error::Precondition(format!(
                "receiver {} has no vertex {}",
                v.receiver, v.packets
            ))
        })?;
        if !state.classify(combo)?.benefits(idx) {
            return Err(Error::ImproperClique {
                combo: *combo,
                receiver: v.receiver,
                packets: v.packets,
            });
        }
    }
    Ok(())
}

/// Delivers `combo` to every receiver whose channel outcome is `true`.
pub fn broadcast_and_update(
    combo: &PacketSet,
    equation: Option<&GfEquation>,
    states: &mut [ReceiverState],
    delivered: &[bool],
) -> Result<Vec<Reception>> {
    if combo.is_empty() {
        return Err(Error::Precondition("empty combination".into()));
    }
    if delivered.len() != states.len() {
        return Err(Error::Precondition(format!(
            "{} channel outcomes for {} receivers",
            delivered.len(),
            states.len()
        )));
    }
    states
        .iter_mut()
        .zip(delivered)
        .map(|(s, &ok)| {
            if ok {
                let eq = if s.oracle_enabled() { equation } else { None };
                s.apply_reception(combo, eq).map(Reception::Received)
            } else {
                Ok(Reception::Erased)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, EdgeRules};

    fn set(ps: &[usize]) -> PacketSet {
        ps.iter().copied().collect()
    }

    fn rx(id: usize, n: usize, has: &[usize], vs: &[&[usize]]) -> ReceiverState {
        ReceiverState::with_vertices(id, n, set(has), vs.iter().map(|v| set(v)).collect(), 0.0)
            .unwrap()
    }

    fn clique_of(g: &CodingGraph, vs: &[(usize, &[usize])]) -> Clique {
        let members = vs
            .iter()
            .map(|(r, x)| {
                g.vertices()
                    .iter()
                    .position(|v| v.receiver == *r && v.packets == set(x))
                    .expect("vertex in graph")
            })
            .collect::<Vec<_>>();
        assert!(g.is_clique(&members));
        Clique::new(members)
    }

    fn three_receivers() -> Vec<ReceiverState> {
        vec![
            rx(0, 5, &[0, 3, 4], &[&[1, 2]]),
            rx(1, 5, &[0, 1, 2], &[&[3, 4]]),
            rx(2, 5, &[0, 2, 4], &[&[1, 3]]),
        ]
    }

    #[test]
    fn two_rounds_serve_three_vertices() {
        let states = three_receivers();
        let g = build_graph(&states, EdgeRules::ConstrainedBc).unwrap();
        let c = clique_of(&g, &[(0, &[1, 2]), (1, &[3, 4]), (2, &[1, 3])]);
        assert_eq!(sub_combinations(&c, &g), vec![set(&[1, 2]), set(&[3, 4])]);
        let combo = determine_combination(&c, &g, &states).unwrap();
        assert_eq!(combo, set(&[1, 2, 3, 4]));
        for s in &states {
            assert_eq!(s.classify(&combo).unwrap(), Classification::Decodes(0));
        }
    }

    #[test]
    fn singleton_clique() {
        let states = vec![rx(0, 4, &[0, 1], &[&[2], &[3]])];
        let g = build_graph(&states, EdgeRules::ConstrainedBc).unwrap();
        let c = clique_of(&g, &[(0, &[3])]);
        assert_eq!(determine_combination(&c, &g, &states).unwrap(), set(&[3]));
    }

    #[test]
    fn shared_packet_clique() {
        // Every receiver wants packet 5 and nothing the others could use.
        let states: Vec<_> = (0..4)
            .map(|i| rx(i, 6, &[0, 1, 2, 3, 4], &[&[5]]))
            .collect();
        let g = build_graph(&states, EdgeRules::ConstrainedBc).unwrap();
        let c = Clique::new((0..4).collect());
        assert!(g.is_clique(c.members()));
        assert_eq!(determine_combination(&c, &g, &states).unwrap(), set(&[5]));
    }

    #[test]
    fn union_failure_is_repaired() {
        let states = vec![
            rx(0, 10, &[0, 2, 4, 6], &[&[1, 7], &[8], &[9], &[3], &[5]]),
            rx(1, 10, &[0, 1, 2], &[&[4, 7, 8, 9], &[3], &[5], &[6]]),
            rx(2, 10, &[0, 2, 3, 4, 5, 6, 7, 8, 9], &[&[1]]),
        ];
        let g = build_graph(&states, EdgeRules::ConstrainedBc).unwrap();
        let c = clique_of(&g, &[(0, &[1, 7]), (1, &[4, 7, 8, 9]), (2, &[1])]);
        let union = sub_combinations(&c, &g)
            .iter()
            .fold(PacketSet::new(), |a, p| a.union(p));
        assert_eq!(union, set(&[1, 4, 7, 8, 9]));
        assert!(matches!(
            check_serves(&union, &c, &g, &states),
            Err(Error::ImproperClique { receiver: 0, .. })
        ));
        let combo = determine_combination(&c, &g, &states).unwrap();
        check_serves(&combo, &c, &g, &states).unwrap();
    }

    #[test]
    fn search_gives_up_on_improper_clique() {
        // Each member must send its own packet, which leaves the other two
        // as separate unknowns at every receiver.
        let states: Vec<_> = (0..3)
            .map(|i| rx(i, 4, &[0], &[&[1], &[2], &[3]]))
            .collect();
        let vertices = (0..3).map(|i| states[i].vertex(i)).collect();
        let g = CodingGraph::from_edges(vertices, &[(0, 1), (1, 2), (0, 2)], EdgeRules::SimpleBc)
            .unwrap();
        let c = Clique::new(vec![0, 1, 2]);
        assert_eq!(search_combination(&c, &g, &states, 1 << 16).unwrap(), None);
        assert!(matches!(
            determine_combination(&c, &g, &states),
            Err(Error::ImproperClique { .. })
        ));
    }

    #[test]
    fn empty_clique_rejected() {
        let states = three_receivers();
        let g = build_graph(&states, EdgeRules::ConstrainedBc).unwrap();
        assert!(matches!(
            determine_combination(&Clique::default(), &g, &states),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn lossless_broadcast_benefits_whole_clique() {
        let mut states = three_receivers();
        let g = build_graph(&states, EdgeRules::ConstrainedBc).unwrap();
        let c = Clique::new((0..g.len()).collect());
        let combo = determine_combination(&c, &g, &states).unwrap();
        let out = broadcast_and_update(&combo, None, &mut states, &[true; 3]).unwrap();
        assert!(out.iter().all(Reception::is_beneficial));
        assert!(states.iter().all(ReceiverState::is_complete));
    }

    #[test]
    fn erased_everywhere_changes_nothing() {
        let mut states = three_receivers();
        let before = states.clone();
        let out = broadcast_and_update(&set(&[1, 2]), None, &mut states, &[false; 3]).unwrap();
        assert_eq!(out, vec![Reception::Erased; 3]);
        assert_eq!(states, before);
    }

    #[test]
    fn bystander_with_packets_in_has() {
        let mut states = three_receivers();
        let before = states[1].clone();
        let out =
            broadcast_and_update(&set(&[1, 2]), None, &mut states, &[false, true, false]).unwrap();
        assert_eq!(out[1], Reception::Received(Classification::NonInnovative));
        assert_eq!(states[1], before);
        assert!(broadcast_and_update(&set(&[1]), None, &mut states, &[true]).is_err());
        assert!(broadcast_and_update(&PacketSet::new(), None, &mut states, &[true; 3]).is_err());
    }
}
