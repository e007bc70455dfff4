//! Seeded randomness.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] built from an
//! explicit `u64` seed. ChaCha8 output is fixed by its reference definition,
//! so a seed names the same stream on every platform.
//!
//! Experiment seeds are derived with [`derive`], a SplitMix64 chain over the
//! base seed and a list of integer coordinates (grid point, trial, stream).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One SplitMix64 output step.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `base` with each coordinate in turn. Pure and order sensitive.
pub fn derive(base: u64, coords: &[u64]) -> u64 {
    coords
        .iter()
        .fold(splitmix64(base), |acc, &c| splitmix64(acc ^ splitmix64(c)))
}

/// Stream tags used when deriving per-trial seeds.
pub mod stream {
    pub const SIGNAL: u64 = 1;
    pub const MATRIX1: u64 = 2;
    pub const MATRIX2: u64 = 3;
    pub const NOISE1: u64 = 4;
    pub const NOISE2: u64 = 5;
    pub const DIRECT_MATRIX: u64 = 6;
    pub const DIRECT_NOISE: u64 = 7;
}
