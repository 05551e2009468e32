//! Seeded random streams. Every path or sample owns the ChaCha stream whose
//! id is its index, so draws never depend on scheduling.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StandardUniform};

pub type StreamRng = ChaCha8Rng;

pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[inline]
pub fn normal(rng: &mut StreamRng) -> f64 {
    StandardNormal.sample(rng)
}

/// Uniform draw on `[0, 1)`.
#[inline]
pub fn unit(rng: &mut StreamRng) -> f64 {
    StandardUniform.sample(rng)
}

#[inline]
pub fn uniform(rng: &mut StreamRng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit(rng)
}

/// Uniform index in `0..n`.
#[inline]
pub fn index(rng: &mut StreamRng, n: usize) -> usize {
    ((unit(rng) * n as f64) as usize).min(n - 1)
}
