//! Seed derivation.
//!
//! Every random choice in a run flows from one 64-bit seed. Components pull
//! independent generators from named substreams so that, for example, the
//! graph generator can be varied without perturbing the token distribution.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Substream names used across the crate.
pub mod stream {
    pub const GENERATOR: &str = "generator";
    pub const DISTRIBUTION: &str = "distribution";
    pub const STRATEGY: &str = "strategy";
    pub const ALG1_SEEDS: &str = "alg1-S";
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a sequence of words into one seed. Order matters.
pub fn mix(words: &[u64]) -> u64 {
    words.iter().fold(0x6a09_e667_f3bc_c908, |acc, &w| {
        splitmix64(acc ^ splitmix64(w))
    })
}

/// Seed of the substream `name` under `seed`.
pub fn substream(seed: u64, name: &str) -> u64 {
    // FNV-1a over the name keeps the mapping stable across platforms.
    let h = name.bytes().fold(0xcbf2_9ce4_8422_2325_u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x100_0000_01b3)
    });
    mix(&[seed, h])
}

pub fn rng_from(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Generator for one (seed, round, node) cell.
pub fn cell_rng(seed: u64, round: usize, node: usize) -> SimRng {
    rng_from(mix(&[seed, round as u64, node as u64]))
}
