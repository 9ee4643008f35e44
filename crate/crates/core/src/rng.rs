//! Deterministic random substreams.
//!
//! Every random decision in the crate draws from a ChaCha8 stream keyed by
//! the root seed plus a path of labels (iteration, firefly, ...), so results
//! never depend on evaluation order or thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) const TAG_FAP_POS: u64 = 1;
pub(crate) const TAG_USER_POS: u64 = 2;
pub(crate) const TAG_RANKING: u64 = 3;
pub(crate) const TAG_HCG: u64 = 4;
pub(crate) const TAG_FA_INIT: u64 = 5;
pub(crate) const TAG_FA_MOVE: u64 = 6;
pub(crate) const TAG_RANDOM_CACHING: u64 = 7;
pub(crate) const TAG_FA: u64 = 8;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a root seed with a label path into a derived 64-bit seed.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |h, &p| splitmix64(h ^ splitmix64(p)))
}

/// A ChaCha8 generator for the given label path under `seed`.
pub fn substream(seed: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, path))
}

/// Maps 64 random bits to a uniform float in `[0, 1)`.
#[inline]
pub(crate) fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
