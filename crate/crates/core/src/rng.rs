//! Seed derivation.
//!
//! Every random quantity comes from a ChaCha stream keyed by a seed derived
//! from one master seed plus a purpose tag and an index. Ensemble members
//! therefore never share state and can be evaluated in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub type Rng = ChaCha12Rng;

/// Purpose tags mixed into derived seeds.
pub mod tag {
    pub const FIELD_FREQUENCIES: u64 = 0x5a;
    pub const FIELD_WEIGHTS: u64 = 0x77;
    pub const SWEEP_ROW: u64 = 0x1001;
    pub const MEMBER: u64 = 0x1002;
    pub const MEMBER_FIELD: u64 = 0x1003;
    pub const SHARED_FIELD: u64 = 0x1004;
    pub const TRAIN_SPLIT: u64 = 0x2001;
    pub const TEST_SPLIT: u64 = 0x2002;
    pub const SHUFFLE: u64 = 0x2003;
    pub const BETA_INIT: u64 = 0x2004;
    pub const CLASSIFIER_FIELD: u64 = 0x2005;
    pub const ECDF: u64 = 0x1005;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministically mixes `(master, tag, index)` into a new 64-bit seed.
pub fn derive_seed(master: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(tag)).wrapping_add(index))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

pub fn derived_rng(master: u64, tag: u64, index: u64) -> Rng {
    rng_from_seed(derive_seed(master, tag, index))
}
