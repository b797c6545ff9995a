//! Counter-based seed derivation and the random draws shared by the
//! channel and link simulators.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type SimRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed with a sequence of counters. Stable across
/// platforms and independent of evaluation order.
pub fn derive_seed(master: u64, words: &[u64]) -> u64 {
    let mut h = splitmix64(master);
    for &w in words {
        h = splitmix64(h ^ splitmix64(w.wrapping_add(0x632B_E59B_D9B4_E019)));
    }
    h
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Circularly-symmetric complex normal with unit variance.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Stream tags so that different consumers of one sample never share draws.
pub mod stream {
    pub const SCENE: u64 = 1;
    pub const INTERACTIONS: u64 = 2;
    pub const RICIAN: u64 = 3;
    pub const PILOT_NOISE: u64 = 4;
    pub const DATA_NOISE: u64 = 5;
    pub const BITS: u64 = 6;
    pub const SPLIT: u64 = 7;
    pub const SMO: u64 = 8;
}
