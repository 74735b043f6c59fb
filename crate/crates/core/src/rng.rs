//! Seed derivation and the few random draws the simulator needs.
//!
//! Every stochastic quantity is derived from a single master seed by mixing in a
//! path of integers (`derive_seed(master, &[trial, STREAM_TX, j])`) with the
//! SplitMix64 finalizer, then seeding a ChaCha8 stream from the result. Two
//! distinct paths give statistically independent streams and the mapping is
//! stable across platforms and thread schedules.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type SimRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Circularly-symmetric complex Gaussian sample with `E|z|² = variance`.
pub fn complex_gaussian(rng: &mut SimRng, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * s, im * s)
}

pub fn complex_gaussian_vec(rng: &mut SimRng, n: usize, variance: f64) -> Vec<Complex64> {
    (0..n).map(|_| complex_gaussian(rng, variance)).collect()
}
