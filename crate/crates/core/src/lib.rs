//! Token-forwarding k-gossip in dynamic networks: a round-based simulator,
//! a strong adversary with its progress certificates, online strategies, and
//! offline schedules built from flows in the time-expanded graph.

pub mod adversary;
pub mod error;
pub mod evolution;
pub mod fixtures;
pub mod harness;
pub mod model;
pub mod offline;
pub mod online;
pub mod rng;

pub use error::{Error, Result};
pub use model::{
    Broadcast, BroadcastVector, CommGraph, Extend, GraphSequence, NodeId, Schedule, TokenId,
    TokenMatrix, Transcript,
};
