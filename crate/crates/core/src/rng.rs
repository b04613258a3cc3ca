//! Named, reproducible RNG substreams.
//!
//! Every random draw derives from one top-level seed plus a path of indices
//! such as `(stream, length, sequence, shot)`. The path is folded through
//! SplitMix64 so work items can be scheduled in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream tags keep unrelated consumers of one seed apart.
pub mod stream {
    pub const FINGERPRINT: u64 = 0x4650;
    pub const NOSC: u64 = 0x4e4f;
    pub const RB_SEQUENCE: u64 = 0x5253;
    pub const RB_SHOT: u64 = 0x5248;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |acc, &p| {
            splitmix64(acc.wrapping_mul(0xd129_1d4b_7e3b_c9a5) ^ splitmix64(p))
        })
}

pub fn substream(seed: u64, path: &[u64]) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(seed, path))
}
