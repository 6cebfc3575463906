//! Seeded random streams.
//!
//! Everything stochastic in the crate (graph generation, partition seeding,
//! per-agent draws) uses SplitMix64 streams derived here, so a given seed
//! reproduces the same graphs and trajectories on every platform.

pub use rand::seq::SliceRandom;
pub use rand::Rng;
pub use rand_xoshiro::SplitMix64;

use rand::SeedableRng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream keyed by `(seed, key)`. Used for per-agent streams: the key is
/// the agent id, never a partition or thread index.
pub fn keyed(seed: u64, key: u64) -> SplitMix64 {
    SplitMix64::seed_from_u64(mix64(seed ^ mix64(key.wrapping_add(GOLDEN_GAMMA))))
}

/// Stream for one draw site of one agent in one superstep.
pub fn for_agent_step(seed: u64, agent: u32, superstep: u64) -> SplitMix64 {
    let base = mix64(seed ^ mix64((agent as u64).wrapping_add(GOLDEN_GAMMA)));
    SplitMix64::seed_from_u64(mix64(
        base ^ mix64(superstep.wrapping_mul(GOLDEN_GAMMA) ^ 0xA5A5),
    ))
}
