//! Reproducible random streams.
//!
//! Every replica gets its own ChaCha stream keyed by the master seed and
//! selected by the replica index, so results do not depend on how replicas
//! are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent stream number `index` under `master_seed`.
pub fn replica_rng(master_seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix64(master_seed));
    rng.set_stream(index);
    rng
}

/// Seed for a named sub-experiment, so that e.g. the two regimes of one
/// run do not share streams.
pub fn sub_seed(master_seed: u64, label: &str) -> u64 {
    label
        .bytes()
        .fold(mix64(master_seed), |acc, b| mix64(acc ^ u64::from(b)))
}
