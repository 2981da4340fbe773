use thiserror::Error;

use crate::packet_set::PacketSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("packet {packet} out of range for frame of {frame_size} packets")]
    IndexOutOfRange { packet: usize, frame_size: usize },

    #[error("frame size {0} exceeds packet-set capacity")]
    FrameTooLarge(usize),

    #[error("inconsistent receiver state: {0}")]
    InconsistentState(String),

    #[error("vertex {0} has dimension > 1 under instantly-decodable rules")]
    DimensionViolation(PacketSet),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("cannot enumerate combinations over {0} packets")]
    CapacityExceeded(usize),

    #[error("graph has {vertices} vertices, exact search is capped at {cap}")]
    SizeCapExceeded { vertices: usize, cap: usize },

    #[error("combination {combo} does not benefit clique vertex of receiver {receiver} with packets {packets}")]
    ImproperClique {
        combo: PacketSet,
        receiver: usize,
        packets: PacketSet,
    },

    #[error("no completion after {slots} slots (limit {limit})")]
    NoProgress { slots: u32, limit: u32 },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
