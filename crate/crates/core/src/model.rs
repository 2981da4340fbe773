//! Receiver side information, generalized vertices, and the per-receiver
//! reaction to a received coded packet.
//!
//! A receiver's Wants set is partitioned into vertices. A vertex with packet
//! set `x` stands for `|x| - 1` stored order-2 innovative packets that are one
//! suitable reception away from decoding all of `x`.

use crate::error::{Error, Result};
use crate::gf_oracle::{GfEquation, GfMatrix};
use crate::packet_set::{PacketSet, MAX_PACKETS};

/// What a receiver is allowed to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum CodingMode {
    /// Only instantly decodable packets are useful; everything else is
    /// dropped.
    InstantOnly,
    /// Aggregating (order-2 innovative) packets are stored as well.
    #[default]
    Order2,
}

/// A receiver's demand unit: receiver index plus the packet set it bundles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub receiver: usize,
    pub packets: PacketSet,
}

impl Vertex {
    pub fn new(receiver: usize, packets: PacketSet) -> Self {
        Self { receiver, packets }
    }

    pub fn dimension(&self) -> usize {
        self.packets.len()
    }
}

/// Effect of one coded packet on one receiver. Indices refer to the
/// receiver's vertex list at classification time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    NonInnovative,
    Decodes(usize),
    /// Always reported with the smaller index first.
    Aggregates(usize, usize),
    Discardable,
}

impl Classification {
    pub fn is_beneficial(&self) -> bool {
        matches!(self, Self::Decodes(_) | Self::Aggregates(..))
    }

    /// True if vertex `v` is decoded or aggregated by this packet.
    pub fn benefits(&self, v: usize) -> bool {
        match *self {
            Self::Decodes(a) => a == v,
            Self::Aggregates(a, b) => a == v || b == v,
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReceiverState {
    id: usize,
    frame_size: usize,
    has: PacketSet,
    vertices: Vec<PacketSet>,
    epsilon: f64,
    mode: CodingMode,
    equations: Option<Vec<GfEquation>>,
    divergences: u32,
}

impl ReceiverState {
    /// Fresh receiver: every wanted packet is its own dimension-1 vertex.
    pub fn new(id: usize, frame_size: usize, has: PacketSet, epsilon: f64) -> Result<Self> {
        let wants = PacketSet::full(frame_size.min(MAX_PACKETS)).difference(&has);
        Self::with_vertices(
            id,
            frame_size,
            has,
            wants.iter().map(PacketSet::singleton).collect(),
            epsilon,
        )
    }

    /// Receiver with an explicit vertex partition of its Wants set.
    pub fn with_vertices(
        id: usize,
        frame_size: usize,
        has: PacketSet,
        vertices: Vec<PacketSet>,
        epsilon: f64,
    ) -> Result<Self> {
        if frame_size > MAX_PACKETS {
            return Err(Error::FrameTooLarge(frame_size));
        }
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::InconsistentState(format!(
                "erasure probability {epsilon} outside [0, 1)"
            )));
        }
        let state = Self {
            id,
            frame_size,
            has,
            vertices,
            epsilon,
            mode: CodingMode::Order2,
            equations: None,
            divergences: 0,
        };
        state.check_invariants()?;
        Ok(state)
    }

    pub fn with_mode(mut self, mode: CodingMode) -> Self {
        self.mode = mode;
        self
    }

    /// Turns on equation bookkeeping. `stored` must back every vertex with
    /// exactly `|x| - 1` equations.
    pub fn with_equations(mut self, stored: Vec<GfEquation>) -> Result<Self> {
        self.equations = Some(stored);
        self.check_invariants()?;
        Ok(self)
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn frame_size(&self) -> usize {
        self.frame_size
    }

    pub fn has(&self) -> PacketSet {
        self.has
    }

    pub fn wants(&self) -> PacketSet {
        PacketSet::full(self.frame_size).difference(&self.has)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn mode(&self) -> CodingMode {
        self.mode
    }

    pub fn vertex_sets(&self) -> &[PacketSet] {
        &self.vertices
    }

    pub fn vertex(&self, idx: usize) -> Vertex {
        Vertex::new(self.id, self.vertices[idx])
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.vertices.iter().map(|&x| Vertex::new(self.id, x))
    }

    /// Position of the vertex with packet set `x`, if this receiver has one.
    pub fn find_vertex(&self, x: &PacketSet) -> Option<usize> {
        self.vertices.iter().position(|v| v == x)
    }

    /// Beneficial receptions still needed.
    pub fn remaining(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_complete(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn stored_equations(&self) -> Option<&[GfEquation]> {
        self.equations.as_deref()
    }

    pub fn oracle_enabled(&self) -> bool {
        self.equations.is_some()
    }

    /// Receptions the set model called beneficial but the equation audit
    /// found linearly dependent.
    pub fn oracle_divergences(&self) -> u32 {
        self.divergences
    }

    fn check_range(&self, combo: &PacketSet) -> Result<()> {
        let ub = combo.upper_bound();
        if ub > self.frame_size {
            return Err(Error::IndexOutOfRange {
                packet: ub - 1,
                frame_size: self.frame_size,
            });
        }
        Ok(())
    }

    /// Classifies `combo` against this receiver's current vertices.
    pub fn classify(&self, combo: &PacketSet) -> Result<Classification> {
        self.check_range(combo)?;
        if combo.is_empty() {
            return Err(Error::Precondition("empty combination".into()));
        }
        Ok(self.classify_unchecked(combo))
    }

    pub(crate) fn classify_unchecked(&self, combo: &PacketSet) -> Classification {
        let unknown = combo.difference(&self.has);
        if unknown.is_empty() {
            return Classification::NonInnovative;
        }
        let mut hit = [0usize; 2];
        let mut count = 0;
        for (i, x) in self.vertices.iter().enumerate() {
            if x.intersects(&unknown) {
                if count == 2 {
                    return Classification::Discardable;
                }
                hit[count] = i;
                count += 1;
            }
        }
        match (count, self.mode) {
            (1, _) => Classification::Decodes(hit[0]),
            (2, CodingMode::Order2) => Classification::Aggregates(hit[0], hit[1]),
            _ => Classification::Discardable,
        }
    }

    /// Classifies `combo` and updates the state accordingly.
    ///
    /// With equation bookkeeping on, `equation` must be the coded packet
    /// actually received; a reception the set model deems beneficial but
    /// whose equation turns out dependent, or an aggregation whose equations
    /// would already pin down a single packet, is counted as a divergence and
    /// treated as non-innovative.
    pub fn apply_reception(
        &mut self,
        combo: &PacketSet,
        equation: Option<&GfEquation>,
    ) -> Result<Classification> {
        let class = self.classify(combo)?;
        if !class.is_beneficial() {
            return Ok(class);
        }
        if let Some(stored) = &self.equations {
            let eq = equation.ok_or_else(|| {
                Error::Precondition("equation required while bookkeeping is on".into())
            })?;
            if eq.support() != *combo {
                return Err(Error::Precondition(format!(
                    "equation support {} differs from combination {combo}",
                    eq.support()
                )));
            }
            let (vars, target) = match class {
                Classification::Decodes(v) => (self.vertices[v], self.vertices[v].len()),
                Classification::Aggregates(a, b) => {
                    let u = self.vertices[a].union(&self.vertices[b]);
                    (u, u.len() - 1)
                }
                _ => unreachable!(),
            };
            let has = self.has;
            let mut mat = GfMatrix::from_equations(
                vars,
                stored.iter().filter(|e| {
                    let unk = e.support().difference(&has);
                    unk.is_subset(&vars)
                }),
            );
            mat.push(eq);
            let degenerate =
                matches!(class, Classification::Aggregates(..)) && mat.determines_a_variable();
            if mat.rank() < target || degenerate {
                self.divergences += 1;
                return Ok(Classification::NonInnovative);
            }
        }
        match class {
            Classification::Decodes(v) => {
                let x = self.vertices.remove(v);
                self.has = self.has.union(&x);
                let has = self.has;
                if let Some(stored) = &mut self.equations {
                    stored.retain(|e| !e.support().is_subset(&has));
                }
            }
            Classification::Aggregates(a, b) => {
                let y = self.vertices.remove(b);
                self.vertices[a] = self.vertices[a].union(&y);
                if let (Some(stored), Some(eq)) = (&mut self.equations, equation) {
                    stored.push(eq.clone());
                }
            }
            _ => unreachable!(),
        }
        self.check_invariants()?;
        Ok(class)
    }

    /// Partition of the Wants set, and (with bookkeeping on) the stored
    /// equation structure behind every vertex.
    pub fn check_invariants(&self) -> Result<()> {
        let fail = |msg: String| {
            Err(Error::InconsistentState(format!(
                "receiver {}: {msg}",
                self.id
            )))
        };
        let frame = PacketSet::full(self.frame_size);
        if !self.has.is_subset(&frame) {
            return fail(format!("Has set {} exceeds frame", self.has));
        }
        let mut seen = PacketSet::new();
        for x in &self.vertices {
            if x.is_empty() {
                return fail("empty vertex".into());
            }
            if x.intersects(&seen) {
                return fail(format!("vertex {x} overlaps another vertex"));
            }
            if x.intersects(&self.has) {
                return fail(format!("vertex {x} overlaps the Has set"));
            }
            seen = seen.union(x);
        }
        if seen != frame.difference(&self.has) {
            return fail(format!(
                "vertices cover {seen}, Wants set is {}",
                self.wants()
            ));
        }
        if let Some(stored) = &self.equations {
            let mut per_vertex = vec![0usize; self.vertices.len()];
            let mut covered = vec![PacketSet::new(); self.vertices.len()];
            for e in stored {
                if e.support().upper_bound() > self.frame_size {
                    return fail(format!("equation over {} exceeds frame", e.support()));
                }
                let unknown = e.support().difference(&self.has);
                let Some(v) = self
                    .vertices
                    .iter()
                    .position(|x| unknown.is_subset(x) && !unknown.is_empty())
                else {
                    return fail(format!(
                        "stored equation over {} fits no vertex",
                        e.support()
                    ));
                };
                per_vertex[v] += 1;
                covered[v] = covered[v].union(&unknown);
            }
            for (v, x) in self.vertices.iter().enumerate() {
                if per_vertex[v] != x.len() - 1 {
                    return fail(format!(
                        "vertex {x} backed by {} equations, expected {}",
                        per_vertex[v],
                        x.len() - 1
                    ));
                }
                if x.len() > 1 && covered[v] != *x {
                    return fail(format!("equations of vertex {x} only cover {}", covered[v]));
                }
            }
        }
        Ok(())
    }
}
