//! Seeded random number generation.
//!
//! Every random stream is a [`ChaCha8Rng`], which is portable across
//! platforms and word sizes. Parallel work never shares a generator: trial
//! `t` of a run with master seed `s` uses the generator seeded with
//! [`derive_seed`]`(s, t)`, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

/// SplitMix64 finaliser applied to `master + (index + 1) * golden_gamma`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for trial `index` of a run seeded with `master`.
pub fn trial_rng(master: u64, index: u64) -> TrialRng {
    rng_from_seed(derive_seed(master, index))
}
