//! Seedable random number generation.
//!
//! The generator is ChaCha8 (counter-based), seeded from a 64-bit seed, so
//! identical seeds reproduce identical streams on every platform. Substreams
//! for sample index `i` are derived with a SplitMix64 mix of (seed, i),
//! letting callers parallelize over samples without sharing generator state.
//!
//! Complex standard normals use the polar Box-Muller form
//! `g = sqrt(-ln u1) * exp(2*pi*i*u2)`, which gives `E g = 0`, `E|g|^2 = 1`,
//! and real/imaginary parts iid N(0, 1/2).

use crate::linalg::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer; used only to derive substream seeds.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent substream for sample `index` under the given base seed.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(index.wrapping_add(1))))
}

/// One complex standard normal with E|g|^2 = 1.
pub fn complex_gaussian(rng: &mut ChaCha8Rng) -> C64 {
    // u1 in (0,1]: shift open interval away from zero for the log
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    let r = (-u1.ln()).sqrt();
    let phi = 2.0 * std::f64::consts::PI * u2;
    C64::new(r * phi.cos(), r * phi.sin())
}

pub fn complex_gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| complex_gaussian(rng)).collect()
}
