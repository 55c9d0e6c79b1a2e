//! Fixed-seed inputs shared by the benchmarks.

use dyngossip::adversary::LOWER_BOUND_DENSITY;
use dyngossip::evolution::{attach_supersource, EvolutionGraph};
use dyngossip::harness::{generate_sequence, GeneratorSpec};
use dyngossip::model::OnlineStrategy;
use dyngossip::model::{new_distribution, BroadcastVector, DistributionSpec, NodeId, TokenMatrix};
use dyngossip::offline::gather_sources;
use dyngossip::online::{Strategy, StrategyKind};
use dyngossip::GraphSequence;

pub const SEED: u64 = 2024;

/// Materialized G(n, p) sequence of `rounds` rounds.
pub fn gnp_sequence(n: usize, p: f64, rounds: usize) -> GraphSequence {
    generate_sequence(&GeneratorSpec::gnp(n, p, SEED), rounds).expect("valid generator")
}

pub fn one_per_node(n: usize, k: usize) -> TokenMatrix {
    new_distribution(n, k, &DistributionSpec::OneTokenPerNode, SEED).expect("valid distribution")
}

/// A dense start and the broadcasts a uniform strategy picks on it, i.e.
/// the input the adversary sees in a lower-bound run.
pub fn adversary_round(n: usize, k: usize) -> (TokenMatrix, BroadcastVector) {
    let state = new_distribution(
        n,
        k,
        &DistributionSpec::Bernoulli(LOWER_BOUND_DENSITY),
        SEED,
    )
    .expect("valid distribution");
    let mut strategy = Strategy::new(StrategyKind::UniformRandom, n, SEED);
    let bcast = strategy.choose(&state, 1);
    (state, bcast)
}

/// Gather instance: evolution graph over the `n + k` window with the
/// super-source attached, plus the source and sink vertex ids.
pub fn gather_instance(n: usize, k: usize) -> (EvolutionGraph, usize, usize) {
    let seq = gnp_sequence(n, 0.1, n + k);
    let init = one_per_node(n, k);
    let target = NodeId(n - 1);
    let sources = gather_sources(&init, target).expect("every token is held");
    let evo = EvolutionGraph::build(&seq, 1, n + k, k).expect("sequence is long enough");
    let evo = attach_supersource(&evo, &sources).expect("sources are in range");
    let s = evo.super_source().expect("attached");
    let t = evo.id(target.0, 2 * (n + k));
    (evo, s, t)
}
