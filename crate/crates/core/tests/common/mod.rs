#![allow(dead_code)]

use dyngossip::harness::GeneratorSpec;
use dyngossip::model::{
    new_distribution, Broadcast, BroadcastVector, DistributionSpec, GraphSequence, TokenMatrix,
};
use dyngossip::online::{choose_broadcasts, StrategyKind, StrategyState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_state(n: usize, k: usize, p: f64, seed: u64) -> TokenMatrix {
    new_distribution(n, k, &DistributionSpec::Bernoulli(p), seed).unwrap()
}

/// Random state where every token has at least one holder.
pub fn seeded_state(n: usize, k: usize, p: f64, seed: u64) -> TokenMatrix {
    let mut m = random_state(n, k, p, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for t in m.tokens().collect::<Vec<_>>() {
        if m.holder_count(t) == 0 {
            let v = rng.gen_range(0..n);
            m.insert(dyngossip::NodeId(v), t);
        }
    }
    m
}

/// Each node broadcasts a held token or stays silent at random.
pub fn random_broadcast(state: &TokenMatrix, seed: u64) -> BroadcastVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    BroadcastVector::from_vec(
        state
            .nodes()
            .map(|v| {
                let held: Vec<_> = state.tokens_of(v).collect();
                if held.is_empty() || rng.gen_bool(0.2) {
                    Broadcast::Empty
                } else {
                    Broadcast::Token(held[rng.gen_range(0..held.len())])
                }
            })
            .collect(),
    )
}

pub fn strategy_broadcast(kind: StrategyKind, state: &TokenMatrix, seed: u64) -> BroadcastVector {
    choose_broadcasts(kind, state, &mut StrategyState::new(state.n()), seed)
}

pub fn gnp_sequence(n: usize, p: f64, seed: u64) -> GraphSequence {
    GraphSequence::generated(GeneratorSpec::gnp(n, p, seed))
}
