//! Counter-based random streams.
//!
//! A stream is addressed by `(seed, stream)`; the same address always yields
//! the same numbers regardless of which worker draws them.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Sampler for a finite distribution.
pub(crate) fn sampler(probs: &[f64]) -> WeightedIndex<f64> {
    WeightedIndex::new(probs).expect("distribution has positive mass")
}

pub(crate) fn draw<R: rand::Rng>(s: &WeightedIndex<f64>, rng: &mut R) -> usize {
    s.sample(rng)
}
