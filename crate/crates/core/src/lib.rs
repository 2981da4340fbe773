//! Order-2 opportunistic network coding.
//!
//! Receivers may store coded packets whose unknown part spans exactly two of
//! their demand vertices; storing one merges the two vertices. The coding
//! graph keeps one vertex per demand unit, and its pairwise edge rules make
//! every clique servable by a single coded transmission. [`sim`] drives a
//! broadcast erasure delivery process on top of it.

pub mod cli;
pub mod clique;
pub mod coding;
pub mod error;
pub mod gf256;
pub mod gf_oracle;
pub mod graph;
pub mod model;
pub mod packet_set;
pub mod scenario_file;
pub mod sim;

pub use clique::{Clique, WeightedGraph};
pub use error::{Error, Result};
pub use graph::{CodingGraph, EdgeRules};
pub use model::{Classification, CodingMode, ReceiverState, Vertex};
pub use packet_set::PacketSet;
