#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use sdht_core::channels::Channel;
use sdht_core::prob::{ExchangeableLaw, FiniteDistribution};
use sdht_core::rng::stream_rng;

pub fn rng(stream: u64) -> ChaCha20Rng {
    stream_rng(0x5d47, stream)
}

/// Full-support random distribution (flat Dirichlet).
pub fn random_dist(rng: &mut impl Rng, m: usize) -> FiniteDistribution {
    let w: Vec<f64> = (0..m).map(|_| -(1.0 - rng.gen::<f64>()).ln() + 1e-3).collect();
    FiniteDistribution::from_weights(&w).unwrap()
}

pub fn random_channel(rng: &mut impl Rng, inputs: usize, outputs: usize) -> Channel {
    Channel::new((0..inputs).map(|_| random_dist(rng, outputs).probs().to_vec()).collect()).unwrap()
}

pub fn mix(a: &FiniteDistribution, b: &FiniteDistribution, t: f64) -> FiniteDistribution {
    FiniteDistribution::new(a.probs().iter().zip(b.probs()).map(|(x, y)| (1.0 - t) * x + t * y).collect()).unwrap()
}

/// (μ0, μ1, μ2) with μ1 strictly between μ0 and μ2.
pub fn collinear_triple(rng: &mut impl Rng, m: usize) -> (FiniteDistribution, FiniteDistribution, FiniteDistribution) {
    let mu0 = random_dist(rng, m);
    let mu2 = random_dist(rng, m);
    let t = rng.gen_range(0.1..0.9);
    (mu0.clone(), mix(&mu0, &mu2, t), mu2)
}

/// Probability of one sequence under a mixture of i.i.d. laws.
pub fn sequence_prob(law: &ExchangeableLaw, seq: &[usize]) -> f64 {
    law.components().iter().map(|(w, mu)| w * seq.iter().map(|&x| mu.get(x)).product::<f64>()).sum()
}

/// Every sequence in [m]^n.
pub fn all_sequences(n: usize, m: usize) -> Vec<Vec<usize>> {
    let total = m.pow(n as u32);
    (0..total)
        .map(|mut i| {
            let mut s = vec![0; n];
            for x in s.iter_mut().rev() {
                *x = i % m;
                i /= m;
            }
            s
        })
        .collect()
}

pub fn brute_force_tv(a: &ExchangeableLaw, b: &ExchangeableLaw) -> f64 {
    0.5 * all_sequences(a.n(), a.alphabet_size())
        .iter()
        .map(|s| (sequence_prob(a, s) - sequence_prob(b, s)).abs())
        .sum::<f64>()
}

/// Least-squares slope and R² of y on x.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, sxy * sxy / (sxx * syy))
}
