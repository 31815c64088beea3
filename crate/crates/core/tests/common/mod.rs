#![allow(dead_code)]

use detfield::DiscreteKernel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_kernel(n: usize, rng: &mut ChaCha8Rng) -> DiscreteKernel<f64> {
    DiscreteKernel::random(n, rng)
}

pub fn random_projector(n: usize, r: usize, rng: &mut ChaCha8Rng) -> DiscreteKernel<f64> {
    DiscreteKernel::random_projector(n, r, rng)
}
