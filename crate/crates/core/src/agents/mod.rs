//! Cache-replacement policies behind one interface: the dueling-DQN agent,
//! LRU and LFU heuristics, and the shared-network centralized variant
//! (driven by the simulation layer feeding every F-AP's stream into one
//! agent).

mod dqn;
mod heuristic;

pub use dqn::{DqnAgent, DqnConfig};
pub use heuristic::{lfu_evict, lru_evict, PolicyStats};

/// Action index: 0 is the explicit no-replacement action, `i >= 1` evicts
/// the content in cache slot `i` (slots order cached contents by ascending
/// content id).
pub const ACTION_NOOP: usize = 0;

/// Fixed state encoding: cache bits (length F) ++ request one-hot
/// (length F) ++ normalized RB index of the requesting user.
pub fn encode_state(cache_bits: &[bool], requested: usize, rb_index: usize, num_rbs: usize) -> Vec<f64> {
    let f = cache_bits.len();
    let mut v = vec![0.0; 2 * f + 1];
    for (i, &b) in cache_bits.iter().enumerate() {
        if b {
            v[i] = 1.0;
        }
    }
    v[f + requested] = 1.0;
    v[2 * f] = if num_rbs > 1 { rb_index as f64 / (num_rbs - 1) as f64 } else { 0.0 };
    v
}
