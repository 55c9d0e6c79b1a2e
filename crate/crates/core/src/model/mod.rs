//! Domain types and the token-forwarding round engine.

mod engine;
mod graph;
pub mod io;
mod tokens;

pub use engine::{
    apply_round, execute_round, is_free_edge, run_online, run_online_with, run_schedule,
    run_schedule_from, Adversary, BroadcastVector, OnlineStrategy, RoundMetrics, RoundRecord,
    Schedule, Transcript,
};
pub use graph::{CommGraph, Extend, GraphSequence};
pub use tokens::{
    missing_count, new_distribution, Broadcast, DistributionSpec, NodeId, TokenId, TokenMatrix,
};
