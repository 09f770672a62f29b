//! Deterministic RNG stream derivation.
//!
//! Every random decision in a run draws from a stream derived from the run
//! seed plus a purpose tag (and indices like iteration and k), so independent
//! components never share state and reruns are bit-identical regardless of
//! scheduling.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags for stream derivation.
pub mod tags {
    pub const POLICY_INIT: u64 = 1;
    pub const CRITIC_INIT: u64 = 2;
    pub const EXPLORE: u64 = 3;
    pub const FINAL_ROLLOUTS: u64 = 4;
    pub const INTRINSIC: u64 = 6;
    pub const AGENT_ROLLOUTS: u64 = 7;
    pub const HRL_PRETRAIN: u64 = 8;
    pub const HRL_HIGH_LEVEL: u64 = 9;
    pub const BLEND: u64 = 10;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent ChaCha stream from `(seed, tags...)`.
pub fn derive_rng(seed: u64, tags: &[u64]) -> ChaCha8Rng {
    let mut state = seed ^ 0xa076_1d64_78bd_642f;
    let mut mixed = splitmix64(&mut state);
    for &t in tags {
        state ^= t.wrapping_mul(0xe703_7ed1_a0b4_28db);
        mixed ^= splitmix64(&mut state);
    }
    let mut key = [0u8; 32];
    let mut s = mixed;
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}
