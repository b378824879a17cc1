//! Random number generation for reproducible experiments.
//!
//! Every random draw in the crate goes through [`ExperimentRng`], which is
//! ChaCha8: a counter-based stream generator keyed by a 64-bit seed. Trial
//! seeds are derived with [`derive_seed`], so each (grid point, trial) pair
//! owns an independent stream and trials can run in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ExperimentRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> ExperimentRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer. A bijection on `u64`.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for trial `trial_index` at grid point `point_index`.
///
/// `mix64(mix64(base_seed) ^ (point_index << 32 | trial_index))`. For a fixed
/// base seed this is injective as long as both indices fit in 32 bits, so
/// distinct (point, trial) pairs never share a stream.
pub fn derive_seed(base_seed: u64, point_index: u32, trial_index: u32) -> u64 {
    let counter = (u64::from(point_index) << 32) | u64::from(trial_index);
    mix64(mix64(base_seed) ^ counter)
}
