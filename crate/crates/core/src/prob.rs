//! Finite distributions, divergences and exact laws of exchangeable sequences.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

use crate::error::{check_dim, Result, SdhtError};

/// Tolerance for a probability vector summing to one.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Largest number of histograms (or sequences) an exact computation may visit.
pub const ENUMERATION_BUDGET: f64 = 1e7;

/// Probability vector over symbols `0..m`.
///
/// Invariants:
/// - every entry lies in [0, 1]
/// - entries sum to 1 within [`SUM_TOLERANCE`]
/// - at least one symbol
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FiniteDistribution {
    probs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for FiniteDistribution {
    type Error = SdhtError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<FiniteDistribution> for Vec<f64> {
    fn from(d: FiniteDistribution) -> Self {
        d.probs
    }
}

impl FiniteDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(SdhtError::InvalidDistribution("empty alphabet".into()));
        }
        if let Some(x) = probs.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(SdhtError::InvalidDistribution(format!("entry {x} outside [0,1]")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(SdhtError::InvalidDistribution(format!("entries sum to {sum}")));
        }
        Ok(Self { probs })
    }

    /// Normalizes non-negative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(SdhtError::InvalidDistribution("negative or non-finite weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(SdhtError::InvalidDistribution("weights sum to zero".into()));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    /// Ber(p): symbol 1 carries mass p.
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(SdhtError::InvalidArgument(format!("Bernoulli mean {p} outside [0,1]")));
        }
        Ok(Self { probs: vec![1.0 - p, p] })
    }

    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(SdhtError::InvalidDistribution("empty alphabet".into()));
        }
        Ok(Self { probs: vec![1.0 / m as f64; m] })
    }

    pub fn point_mass(m: usize, symbol: usize) -> Result<Self> {
        if symbol >= m {
            return Err(SdhtError::InvalidArgument(format!("symbol {symbol} outside alphabet of size {m}")));
        }
        let mut probs = vec![0.0; m];
        probs[symbol] = 1.0;
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn get(&self, symbol: usize) -> f64 {
        self.probs[symbol]
    }

    /// Builds from a vector that is already known to be stochastic up to
    /// rounding; tiny negative entries are clamped.
    pub(crate) fn from_raw(mut probs: Vec<f64>) -> Result<Self> {
        for p in probs.iter_mut() {
            if *p < 0.0 && *p > -1e-14 {
                *p = 0.0;
            }
            if *p > 1.0 && *p < 1.0 + 1e-14 {
                *p = 1.0;
            }
        }
        Self::new(probs)
    }
}

/// Symbol counts of an n-sample sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Histogram {
    counts: Vec<usize>,
    n: usize,
}

impl Histogram {
    pub fn new(counts: Vec<usize>) -> Self {
        let n = counts.iter().sum();
        Self { counts, n }
    }

    pub fn from_sequence(seq: &[usize], alphabet_size: usize) -> Result<Self> {
        let mut counts = vec![0; alphabet_size];
        for &y in seq {
            if y >= alphabet_size {
                return Err(SdhtError::InvalidArgument(format!("symbol {y} outside alphabet of size {alphabet_size}")));
            }
            counts[y] += 1;
        }
        Ok(Self::new(counts))
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    /// Natural log of the number of sequences with this histogram.
    pub fn ln_multinomial(&self) -> f64 {
        ln_factorial(self.n as u64) - self.counts.iter().map(|&c| ln_factorial(c as u64)).sum::<f64>()
    }
}

/// Number of histograms of n samples over m symbols, C(n+m-1, m-1), as f64.
pub fn histogram_count(n: usize, m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let mut c = 1.0;
    for i in 0..(m - 1) {
        c *= (n as f64 + 1.0 + i as f64) / (i as f64 + 1.0);
    }
    c.round()
}

pub(crate) fn check_budget(count: f64) -> Result<()> {
    if count > ENUMERATION_BUDGET {
        Err(SdhtError::BudgetExceeded { count, budget: ENUMERATION_BUDGET })
    } else {
        Ok(())
    }
}

/// Calls `f` on every histogram of n samples over m symbols, in
/// lexicographically decreasing order of counts.
pub fn for_each_histogram(n: usize, m: usize, mut f: impl FnMut(&Histogram)) {
    if m == 0 {
        return;
    }
    let mut h = Histogram { counts: vec![0; m], n };
    h.counts[0] = n;
    loop {
        f(&h);
        // Find the rightmost position (excluding the last) with a positive count.
        let last = m - 1;
        let Some(i) = (0..last).rev().find(|&i| h.counts[i] > 0) else {
            return;
        };
        h.counts[i] -= 1;
        let tail = h.counts[last];
        h.counts[last] = 0;
        h.counts[i + 1] += tail + 1;
    }
}

/// All histograms of n samples over m symbols.
pub fn histograms(n: usize, m: usize) -> Vec<Histogram> {
    let mut out = Vec::new();
    for_each_histogram(n, m, |h| out.push(h.clone()));
    out
}

pub fn tv_distance(p: &FiniteDistribution, q: &FiniteDistribution) -> Result<f64> {
    check_dim(p.alphabet_size(), q.alphabet_size())?;
    let s: f64 = p.probs.iter().zip(&q.probs).map(|(a, b)| (a - b).abs()).sum();
    Ok(0.5 * s)
}

pub fn hellinger_sq(p: &FiniteDistribution, q: &FiniteDistribution) -> Result<f64> {
    check_dim(p.alphabet_size(), q.alphabet_size())?;
    Ok(p.probs.iter().zip(&q.probs).map(|(a, b)| sqrt_diff_sq(*a, *b)).sum())
}

/// (√x − √y)², evaluated as (x−y)²/(√x+√y)² to avoid cancellation.
pub fn sqrt_diff_sq(x: f64, y: f64) -> f64 {
    let s = x.sqrt() + y.sqrt();
    if s == 0.0 {
        0.0
    } else {
        let d = (x - y) / s;
        d * d
    }
}

/// H²(Ber x, Ber y) without cancellation near x ≈ y.
pub fn bernoulli_hellinger_sq(x: f64, y: f64) -> f64 {
    sqrt_diff_sq(x, y) + sqrt_diff_sq(1.0 - x, 1.0 - y)
}

/// Optimal deterministic test between P (label 0) and Q (label 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeterministicTest {
    /// Symbols on which the test outputs 1.
    pub accept_set: Vec<usize>,
    /// P[D = 0] + Q[D = 1].
    pub score: f64,
}

pub fn best_deterministic_test(p: &FiniteDistribution, q: &FiniteDistribution) -> Result<DeterministicTest> {
    let tv = tv_distance(p, q)?;
    let accept_set = (0..p.alphabet_size()).filter(|&x| q.probs[x] > p.probs[x]).collect();
    Ok(DeterministicTest { accept_set, score: 1.0 + tv })
}

/// P[D = 0] + Q[D = 1] of the indicator test of `accept_set`.
pub fn test_score(p: &FiniteDistribution, q: &FiniteDistribution, accept_set: &[usize]) -> Result<f64> {
    check_dim(p.alphabet_size(), q.alphabet_size())?;
    let mut inside = vec![false; p.alphabet_size()];
    for &x in accept_set {
        if x >= inside.len() {
            return Err(SdhtError::InvalidArgument(format!("symbol {x} outside alphabet")));
        }
        inside[x] = true;
    }
    Ok((0..p.alphabet_size()).map(|x| if inside[x] { q.probs[x] } else { p.probs[x] }).sum())
}

/// Mixture of i.i.d. n-sample product laws.
///
/// Invariants:
/// - weights are non-negative and sum to 1
/// - every marginal has the same alphabet size
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchangeableLaw {
    n: usize,
    components: Vec<(f64, FiniteDistribution)>,
}

impl ExchangeableLaw {
    pub fn new(n: usize, components: Vec<(f64, FiniteDistribution)>) -> Result<Self> {
        if n == 0 {
            return Err(SdhtError::InvalidArgument("n must be at least 1".into()));
        }
        let Some((_, first)) = components.first() else {
            return Err(SdhtError::InvalidArgument("law needs at least one component".into()));
        };
        let m = first.alphabet_size();
        for (w, d) in &components {
            check_dim(m, d.alphabet_size())?;
            if !(*w >= 0.0) {
                return Err(SdhtError::InvalidArgument(format!("negative weight {w}")));
            }
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(SdhtError::InvalidArgument(format!("weights sum to {total}")));
        }
        Ok(Self { n, components })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet_size(&self) -> usize {
        self.components[0].1.alphabet_size()
    }

    pub fn components(&self) -> &[(f64, FiniteDistribution)] {
        &self.components
    }

    /// Weighted average of the component marginals (the one-sample law).
    pub fn average_marginal(&self) -> FiniteDistribution {
        let mut avg = vec![0.0; self.alphabet_size()];
        for (w, d) in &self.components {
            for (a, p) in avg.iter_mut().zip(d.probs()) {
                *a += w * p;
            }
        }
        FiniteDistribution::from_raw(avg).expect("mixture of distributions is a distribution")
    }

    /// Log-probability of one particular sequence with histogram `h`.
    pub fn ln_sequence_prob(&self, h: &Histogram) -> f64 {
        let terms: Vec<f64> =
            self.components.iter().filter(|(w, _)| *w > 0.0).map(|(w, d)| w.ln() + ln_product(d, h)).collect();
        log_sum_exp(&terms)
    }
}

fn ln_product(d: &FiniteDistribution, h: &Histogram) -> f64 {
    let mut s = 0.0;
    for (&c, &p) in h.counts.iter().zip(d.probs()) {
        if c > 0 {
            if p == 0.0 {
                return f64::NEG_INFINITY;
            }
            s += c as f64 * p.ln();
        }
    }
    s
}

pub(crate) fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

pub fn iid_law(marginal: &FiniteDistribution, n: usize) -> Result<ExchangeableLaw> {
    ExchangeableLaw::new(n, vec![(1.0, marginal.clone())])
}

pub fn mix_laws(components: &[(f64, ExchangeableLaw)]) -> Result<ExchangeableLaw> {
    let Some((_, first)) = components.first() else {
        return Err(SdhtError::InvalidArgument("nothing to mix".into()));
    };
    let mut flat = Vec::new();
    for (w, law) in components {
        check_dim(first.n, law.n)?;
        check_dim(first.alphabet_size(), law.alphabet_size())?;
        for (v, d) in &law.components {
            flat.push((w * v, d.clone()));
        }
    }
    ExchangeableLaw::new(first.n, flat)
}

fn check_hist(law: &ExchangeableLaw, h: &Histogram) -> Result<()> {
    check_dim(law.n, h.n)?;
    check_dim(law.alphabet_size(), h.alphabet_size())
}

/// Probability that the n-sample sequence has histogram `h`.
pub fn histogram_prob(law: &ExchangeableLaw, h: &Histogram) -> Result<f64> {
    check_hist(law, h)?;
    Ok(histogram_prob_unchecked(law, h))
}

fn histogram_prob_unchecked(law: &ExchangeableLaw, h: &Histogram) -> f64 {
    let lm = h.ln_multinomial();
    law.components
        .iter()
        .map(|(w, d)| {
            let lp = ln_product(d, h);
            if lp == f64::NEG_INFINITY {
                0.0
            } else {
                w * (lm + lp).exp()
            }
        })
        .sum()
}

fn check_pair(a: &ExchangeableLaw, b: &ExchangeableLaw) -> Result<()> {
    check_dim(a.n, b.n)?;
    check_dim(a.alphabet_size(), b.alphabet_size())?;
    check_budget(histogram_count(a.n, a.alphabet_size()))
}

/// Exact total variation distance between the two n-sample sequence laws.
pub fn law_tv(a: &ExchangeableLaw, b: &ExchangeableLaw) -> Result<f64> {
    check_pair(a, b)?;
    let mut s = 0.0;
    for_each_histogram(a.n, a.alphabet_size(), |h| {
        s += (histogram_prob_unchecked(a, h) - histogram_prob_unchecked(b, h)).abs();
    });
    Ok((0.5 * s).clamp(0.0, 1.0))
}

/// Exact squared Hellinger distance between the two n-sample sequence laws.
pub fn law_hellinger_sq(a: &ExchangeableLaw, b: &ExchangeableLaw) -> Result<f64> {
    check_pair(a, b)?;
    let mut s = 0.0;
    for_each_histogram(a.n, a.alphabet_size(), |h| {
        s += sqrt_diff_sq(histogram_prob_unchecked(a, h), histogram_prob_unchecked(b, h));
    });
    Ok(s)
}

/// Mass of sequences whose histogram satisfies `predicate`.
pub fn symmetric_event_prob(law: &ExchangeableLaw, mut predicate: impl FnMut(&Histogram) -> bool) -> Result<f64> {
    check_budget(histogram_count(law.n, law.alphabet_size()))?;
    let mut s = 0.0;
    for_each_histogram(law.n, law.alphabet_size(), |h| {
        if predicate(h) {
            s += histogram_prob_unchecked(law, h);
        }
    });
    Ok(s.clamp(0.0, 1.0))
}
