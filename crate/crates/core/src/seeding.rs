//! Derivation of independent RNG streams from one master seed.
//!
//! Every stochastic component (request generation, network init, policy
//! exploration, replay sampling, ...) owns its own ChaCha stream so that
//! runs are bit-reproducible and request traces are shared across policies.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream labels. The numeric value is mixed into the derived seed.
#[derive(Debug, Clone, Copy)]
pub enum Stream {
    Requests = 1,
    Topology = 2,
    PolicyInit = 3,
    Exploration = 4,
    Replay = 5,
    Popularity = 6,
    Federation = 7,
    ConvergenceNoise = 8,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed for `(stream, index)` from the master seed.
pub fn derive(master: u64, stream: Stream, index: u64) -> u64 {
    let a = splitmix64(master ^ (stream as u64).wrapping_mul(0xa076_1d64_78bd_642f));
    splitmix64(a ^ index.wrapping_mul(0xe703_7ed1_a0b4_28db))
}

/// A seeded ChaCha stream for `(master, stream, index)`.
pub fn rng(master: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, stream, index))
}
