//! Seeded randomness. Every work item gets its own ChaCha stream so sweeps
//! are reproducible regardless of the execution policy.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SampleRng = ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 42;

/// Generator for work item `stream` of a sweep seeded with `seed`.
pub fn rng_for(seed: u64, stream: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Vector of `len` coordinates drawn uniformly from `[-1, 1]`.
pub fn uniform_vector(rng: &mut SampleRng, len: usize) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.random_range(-1.0..=1.0))
}
