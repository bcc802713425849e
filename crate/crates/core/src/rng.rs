//! Seeded random-number streams and the few scalar distributions used across
//! the crate.
//!
//! Every run is driven by a single `u64` master seed. Independent streams
//! (per dataset item, per chain, per bootstrap replicate) are derived from
//! `(seed, tag, index)` so parallel workers never share state and outputs do
//! not depend on scheduling.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::fmath;

/// splitmix64 finalizer; also used by the WL fingerprint.
#[inline]
pub(crate) fn mix64(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xbf58476d1ce4e5b9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94d049bb133111eb);
    x ^= x >> 31;
    x
}

fn hash_tag(tag: &str) -> u64 {
    // FNV-1a over the tag bytes.
    let mut h = 0xcbf29ce484222325u64;
    for &b in tag.as_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Deterministic RNG for a master seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    derive_rng(seed, "root", 0)
}

/// Deterministic RNG for the `(seed, tag, index)` stream.
pub fn derive_rng(seed: u64, tag: &str, index: u64) -> ChaCha8Rng {
    let mut state = mix64(seed ^ hash_tag(tag).rotate_left(17) ^ index.wrapping_mul(0x9e3779b97f4a7c15));
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        state = mix64(state.wrapping_add(0x9e3779b97f4a7c15));
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Geometric draw on {1, 2, ...} with expectation `mean_steps`
/// (success probability `1/mean_steps`), via the inverse CDF.
pub fn sample_geometric<R: Rng>(rng: &mut R, mean_steps: f64) -> u64 {
    debug_assert!(mean_steps >= 1.0);
    if mean_steps <= 1.0 {
        return 1;
    }
    let p = 1.0 / mean_steps;
    let u: f64 = rng.gen(); // [0, 1)
    // k = 1 + floor(ln(1-u) / ln(1-p)); 1-u is in (0, 1] so ln is finite.
    let k = 1.0 + fmath::floor(fmath::ln(1.0 - u) / fmath::ln(1.0 - p));
    k as u64
}

/// Box-Muller normal draw (one value per call; the sine partner is discarded
/// to keep the stream layout simple).
pub fn sample_normal<R: Rng>(rng: &mut R, mean: f64, std_dev: f64) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
    let u2: f64 = rng.gen();
    mean + std_dev * fmath::sqrt(-2.0 * fmath::ln(u1)) * fmath::cos(2.0 * core::f64::consts::PI * u2)
}

/// Uniform draw in `[lo, hi)` (degenerate when `lo == hi`).
pub fn sample_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}
