//! Scheme assembly and exact or Monte Carlo evaluation of (ε, δ).

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{
    bernoulli_symmetrizer, collinearity_check, compose, push_forward, separating_channel, sign_channel, Channel,
};
use crate::error::{check_dim, Result, SdhtError};
use crate::prob::{
    check_budget, for_each_histogram, histogram_count, iid_law, law_tv, mix_laws, symmetric_event_prob,
    ExchangeableLaw, FiniteDistribution, Histogram,
};
use crate::rng::{draw, sampler, stream_rng};

/// Log-likelihood-ratio differences within this distance count as ties.
const LLR_TIE: f64 = 1e-12;
/// Log-likelihood ratios closer than this are one group when sweeping thresholds.
const LLR_GROUP: f64 = 1e-9;
/// Pushforwards closer than this (max entry difference) count as equal.
const PUSHFORWARD_TOL: f64 = 1e-10;

/// Deterministic decision rule, serialized by name and parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum DetectorSpec {
    /// Always outputs `label`.
    Constant { label: u8 },
    /// Binary messages: 1 iff more than half are 1 (ties to 0).
    Majority,
    /// 1 iff at least `min_count` messages equal `symbol`.
    Threshold { symbol: usize, min_count: usize },
    /// 1 iff ln P_alt(seq) − ln P_null(seq) exceeds `log_threshold` (ties to 0).
    LikelihoodRatio { null: ExchangeableLaw, alternative: ExchangeableLaw, log_threshold: f64 },
    /// Binary messages with empirical frequency p̂ of symbol 1: class 0 iff
    /// min(|p̂−p|, |p̂−(1−p)|) ≤ min(|p̂−q|, |p̂−(1−q)|).
    NearestClass { p: f64, q: f64 },
    /// Applies `inner` to the messages of the listed clients only.
    Restricted { clients: Vec<usize>, inner: Box<DetectorSpec> },
    /// 1 iff the message histogram is listed in `accept` (sorted counts vectors).
    AcceptSet { n: usize, alphabet_size: usize, accept: Vec<Vec<usize>> },
}

impl DetectorSpec {
    /// True if the decision depends only on the message histogram.
    pub fn is_symmetric(&self) -> bool {
        !matches!(self, DetectorSpec::Restricted { .. })
    }

    /// Sample count the rule was built for, if it fixes one.
    pub fn expected_len(&self) -> Option<usize> {
        match self {
            DetectorSpec::LikelihoodRatio { null, .. } => Some(null.n()),
            DetectorSpec::AcceptSet { n, .. } => Some(*n),
            _ => None,
        }
    }

    pub fn decide_histogram(&self, h: &Histogram) -> Result<u8> {
        let c = h.counts();
        let need_binary = || check_dim(2, c.len());
        Ok(match self {
            DetectorSpec::Constant { label } => *label,
            DetectorSpec::Majority => {
                need_binary()?;
                u8::from(2 * c[1] > h.n())
            }
            DetectorSpec::Threshold { symbol, min_count } => {
                if *symbol >= c.len() {
                    return Err(SdhtError::InvalidArgument(format!("threshold symbol {symbol} outside alphabet")));
                }
                u8::from(c[*symbol] >= *min_count)
            }
            DetectorSpec::LikelihoodRatio { null, alternative, log_threshold } => {
                check_dim(null.n(), h.n())?;
                check_dim(null.alphabet_size(), h.alphabet_size())?;
                u8::from(log_likelihood_ratio(null, alternative, h) > log_threshold + LLR_TIE)
            }
            DetectorSpec::NearestClass { p, q } => {
                need_binary()?;
                let f = c[1] as f64 / h.n() as f64;
                let d0 = (f - p).abs().min((f - (1.0 - p)).abs());
                let d1 = (f - q).abs().min((f - (1.0 - q)).abs());
                u8::from(d0 > d1 + LLR_TIE)
            }
            DetectorSpec::AcceptSet { n, alphabet_size, accept } => {
                check_dim(*n, h.n())?;
                check_dim(*alphabet_size, c.len())?;
                u8::from(accept.binary_search_by(|a| a.as_slice().cmp(c)).is_ok())
            }
            DetectorSpec::Restricted { .. } => {
                return Err(SdhtError::InvalidArgument(
                    "restricted detector needs the message sequence, not its histogram".into(),
                ))
            }
        })
    }

    pub fn decide_sequence(&self, seq: &[usize], alphabet_size: usize) -> Result<u8> {
        match self {
            DetectorSpec::Restricted { clients, inner } => {
                let sub = clients
                    .iter()
                    .map(|&i| {
                        seq.get(i)
                            .copied()
                            .ok_or_else(|| SdhtError::InvalidArgument(format!("client {i} outside sequence")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                inner.decide_sequence(&sub, alphabet_size)
            }
            _ => self.decide_histogram(&Histogram::from_sequence(seq, alphabet_size)?),
        }
    }
}

/// ln P_alt(seq) − ln P_null(seq) for any sequence with histogram `h`.
pub fn log_likelihood_ratio(null: &ExchangeableLaw, alternative: &ExchangeableLaw, h: &Histogram) -> f64 {
    let a = alternative.ln_sequence_prob(h);
    let b = null.ln_sequence_prob(h);
    if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
        0.0
    } else {
        a - b
    }
}

/// Key-conditioned channels of a scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeChannels {
    /// One channel per key, shared by every client.
    Identical(Vec<Channel>),
    /// `[client][key]`.
    PerClient(Vec<Vec<Channel>>),
}

/// SDHT scheme with a uniform shared key.
///
/// Invariants:
/// - every channel has the same input and output alphabets
/// - one channel per key (per client for `PerClient`)
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyedScheme {
    pub n: usize,
    pub key_count: usize,
    pub channels: SchemeChannels,
    pub detector: DetectorSpec,
}

impl KeyedScheme {
    pub fn new(n: usize, key_count: usize, channels: SchemeChannels, detector: DetectorSpec) -> Result<Self> {
        let s = Self { n, key_count, channels, detector };
        s.validate()?;
        Ok(s)
    }

    pub fn keyless(n: usize, channel: Channel, detector: DetectorSpec) -> Result<Self> {
        Self::new(n, 1, SchemeChannels::Identical(vec![channel]), detector)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.key_count == 0 {
            return Err(SdhtError::InvalidArgument("n and key_count must be positive".into()));
        }
        let all: Vec<&Channel> = match &self.channels {
            SchemeChannels::Identical(ks) => {
                check_dim(self.key_count, ks.len())?;
                ks.iter().collect()
            }
            SchemeChannels::PerClient(cs) => {
                check_dim(self.n, cs.len())?;
                for ks in cs {
                    check_dim(self.key_count, ks.len())?;
                }
                cs.iter().flatten().collect()
            }
        };
        let first = all[0];
        for c in &all {
            check_dim(first.input_size(), c.input_size())?;
            check_dim(first.output_size(), c.output_size())?;
        }
        if let Some(len) = self.detector.expected_len() {
            check_dim(self.n, len)?;
        }
        Ok(())
    }

    fn any_channel(&self) -> &Channel {
        match &self.channels {
            SchemeChannels::Identical(ks) => &ks[0],
            SchemeChannels::PerClient(cs) => &cs[0][0],
        }
    }

    pub fn input_size(&self) -> usize {
        self.any_channel().input_size()
    }

    pub fn output_size(&self) -> usize {
        self.any_channel().output_size()
    }

    fn channel(&self, client: usize, key: usize) -> &Channel {
        match &self.channels {
            SchemeChannels::Identical(ks) => &ks[key],
            SchemeChannels::PerClient(cs) => &cs[client][key],
        }
    }

    /// n·⌈log₂|Y|⌉.
    pub fn comm_bits(&self) -> u64 {
        self.n as u64 * ceil_log2(self.output_size())
    }

    /// ⌈log₂ key_count⌉.
    pub fn key_bits(&self) -> u64 {
        ceil_log2(self.key_count)
    }

    fn histogram_path(&self) -> bool {
        matches!(self.channels, SchemeChannels::Identical(_)) && self.detector.is_symmetric()
    }
}

pub fn ceil_log2(k: usize) -> u64 {
    if k <= 1 {
        0
    } else {
        (usize::BITS - (k - 1).leading_zeros()) as u64
    }
}

/// Law of the message sequence under μ, averaged over the key.
pub fn message_law(scheme: &KeyedScheme, mu: &FiniteDistribution) -> Result<ExchangeableLaw> {
    let SchemeChannels::Identical(ks) = &scheme.channels else {
        return Err(SdhtError::InvalidArgument(
            "per-client channels do not give an exchangeable law; use the sequence path".into(),
        ));
    };
    check_dim(scheme.input_size(), mu.alphabet_size())?;
    let w = 1.0 / scheme.key_count as f64;
    let laws = ks.iter().map(|c| Ok((w, iid_law(&push_forward(c, mu)?, scheme.n)?))).collect::<Result<Vec<_>>>()?;
    mix_laws(&laws)
}

/// Probability of every message sequence (row-major, client 0 most significant).
pub fn sequence_law(scheme: &KeyedScheme, mu: &FiniteDistribution) -> Result<Vec<f64>> {
    check_dim(scheme.input_size(), mu.alphabet_size())?;
    let m = scheme.output_size();
    let total = (m as f64).powi(scheme.n as i32);
    check_budget(total)?;
    let mut out = vec![0.0; total as usize];
    let w = 1.0 / scheme.key_count as f64;
    for k in 0..scheme.key_count {
        let marg = (0..scheme.n).map(|i| push_forward(scheme.channel(i, k), mu)).collect::<Result<Vec<_>>>()?;
        // Build the product law client by client.
        let mut law = vec![w];
        for d in &marg {
            law = law.iter().flat_map(|&a| d.probs().iter().map(move |&b| a * b)).collect();
        }
        for (o, v) in out.iter_mut().zip(law) {
            *o += v;
        }
    }
    Ok(out)
}

fn index_to_sequence(mut idx: usize, n: usize, m: usize, seq: &mut [usize]) {
    for i in (0..n).rev() {
        seq[i] = idx % m;
        idx /= m;
    }
}

fn check_classes(scheme: &KeyedScheme, h0: &[FiniteDistribution], h1: &[FiniteDistribution]) -> Result<()> {
    if h0.is_empty() || h1.is_empty() {
        return Err(SdhtError::InvalidArgument("both hypothesis classes must be non-empty".into()));
    }
    for mu in h0.iter().chain(h1) {
        check_dim(scheme.input_size(), mu.alphabet_size())?;
    }
    Ok(())
}

fn error_prob(scheme: &KeyedScheme, mu: &FiniteDistribution, label: u8) -> Result<f64> {
    if scheme.histogram_path() {
        let law = message_law(scheme, mu)?;
        let mut err = None;
        let p = symmetric_event_prob(&law, |h| match scheme.detector.decide_histogram(h) {
            Ok(d) => d != label,
            Err(e) => {
                err.get_or_insert(e);
                false
            }
        })?;
        match err {
            Some(e) => Err(e),
            None => Ok(p),
        }
    } else {
        let law = sequence_law(scheme, mu)?;
        let (n, m) = (scheme.n, scheme.output_size());
        let mut seq = vec![0; n];
        let mut p = 0.0;
        for (idx, &v) in law.iter().enumerate() {
            index_to_sequence(idx, n, m, &mut seq);
            if scheme.detector.decide_sequence(&seq, m)? != label {
                p += v;
            }
        }
        Ok(p.clamp(0.0, 1.0))
    }
}

/// max over b and μ ∈ H_b of P[detector ≠ b].
pub fn correctness_error(scheme: &KeyedScheme, h0: &[FiniteDistribution], h1: &[FiniteDistribution]) -> Result<f64> {
    check_classes(scheme, h0, h1)?;
    let mut eps: f64 = 0.0;
    for (label, class) in [(0u8, h0), (1u8, h1)] {
        for mu in class {
            eps = eps.max(error_prob(scheme, mu, label)?);
        }
    }
    Ok(eps)
}

/// max over pairs in `class` of the TV distance between message laws.
pub fn privacy_delta(scheme: &KeyedScheme, class: &[FiniteDistribution]) -> Result<f64> {
    if class.is_empty() {
        return Err(SdhtError::InvalidArgument("class must be non-empty".into()));
    }
    let mut delta: f64 = 0.0;
    if matches!(scheme.channels, SchemeChannels::Identical(_)) {
        let laws = class.iter().map(|mu| message_law(scheme, mu)).collect::<Result<Vec<_>>>()?;
        for i in 0..laws.len() {
            for j in i + 1..laws.len() {
                delta = delta.max(law_tv(&laws[i], &laws[j])?);
            }
        }
    } else {
        let laws = class.iter().map(|mu| sequence_law(scheme, mu)).collect::<Result<Vec<_>>>()?;
        for i in 0..laws.len() {
            for j in i + 1..laws.len() {
                let tv: f64 = laws[i].iter().zip(&laws[j]).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
                delta = delta.max(tv.clamp(0.0, 1.0));
            }
        }
    }
    Ok(delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

/// Measured (ε, δ) and costs of a scheme.
///
/// JSON: an object with the fields below. CSV: [`EvaluationReport::CSV_HEADER`]
/// and one row from [`EvaluationReport::csv_row`]; absent optionals are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub epsilon: f64,
    pub delta: f64,
    pub comm_bits: u64,
    pub key_bits: u64,
    pub method: Method,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub epsilon_stderr: Option<f64>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl EvaluationReport {
    pub const CSV_HEADER: &'static str = "epsilon,delta,comm_bits,key_bits,method,trials,seed,epsilon_stderr";

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{}",
            self.epsilon,
            self.delta,
            self.comm_bits,
            self.key_bits,
            self.method.as_str(),
            opt(self.trials.map(|t| t.to_string())),
            opt(self.seed.map(|t| t.to_string())),
            opt(self.epsilon_stderr.map(|t| t.to_string())),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

pub fn evaluate(
    scheme: &KeyedScheme,
    h0: &[FiniteDistribution],
    h1: &[FiniteDistribution],
) -> Result<EvaluationReport> {
    let epsilon = correctness_error(scheme, h0, h1)?;
    let delta = privacy_delta(scheme, h0)?.max(privacy_delta(scheme, h1)?);
    Ok(EvaluationReport {
        epsilon,
        delta,
        comm_bits: scheme.comm_bits(),
        key_bits: scheme.key_bits(),
        method: Method::Exact,
        trials: None,
        seed: None,
        epsilon_stderr: None,
        warnings: Vec::new(),
    })
}

fn mix_seed(seed: u64, class: u64, member: u64) -> u64 {
    // splitmix64 finalizer over the address.
    let mut z = seed ^ (class << 32 | member).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Simulator<'a> {
    scheme: &'a KeyedScheme,
    input: rand::distributions::WeightedIndex<f64>,
    // [client][key][x]
    rows: Vec<Vec<Vec<rand::distributions::WeightedIndex<f64>>>>,
}

impl<'a> Simulator<'a> {
    fn new(scheme: &'a KeyedScheme, mu: &FiniteDistribution) -> Self {
        let clients = match &scheme.channels {
            SchemeChannels::Identical(_) => 1,
            SchemeChannels::PerClient(_) => scheme.n,
        };
        let rows = (0..clients)
            .map(|i| {
                (0..scheme.key_count)
                    .map(|k| scheme.channel(i, k).rows().iter().map(|r| sampler(r)).collect())
                    .collect()
            })
            .collect();
        Self { scheme, input: sampler(mu.probs()), rows }
    }

    fn messages<R: Rng>(&self, rng: &mut R) -> Vec<usize> {
        let k = rng.gen_range(0..self.scheme.key_count);
        (0..self.scheme.n)
            .map(|i| {
                let x = draw(&self.input, rng);
                let c = if self.rows.len() == 1 { 0 } else { i };
                draw(&self.rows[c][k][x], rng)
            })
            .collect()
    }
}

/// Monte Carlo estimate of (ε, δ); trial `t` for class member `(b, j)` uses
/// its own counter-addressed stream, so results do not depend on threading.
pub fn monte_carlo_evaluate(
    scheme: &KeyedScheme,
    h0: &[FiniteDistribution],
    h1: &[FiniteDistribution],
    trials: u64,
    seed: u64,
) -> Result<EvaluationReport> {
    check_classes(scheme, h0, h1)?;
    if trials == 0 {
        return Err(SdhtError::InvalidArgument("trials must be at least 1".into()));
    }
    let m = scheme.output_size();
    let mut epsilon: f64 = -1.0;
    let mut stderr = 0.0;
    let mut delta: f64 = 0.0;
    for (label, class) in [(0u8, h0), (1u8, h1)] {
        let mut tallies: Vec<BTreeMap<Vec<usize>, u64>> = Vec::new();
        for (j, mu) in class.iter().enumerate() {
            let sim = Simulator::new(scheme, mu);
            let base = mix_seed(seed, label as u64, j as u64);
            let outcomes = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = stream_rng(base, t);
                    let seq = sim.messages(&mut rng);
                    let wrong = scheme.detector.decide_sequence(&seq, m)? != label;
                    Ok((wrong, Histogram::from_sequence(&seq, m)?.counts().to_vec()))
                })
                .collect::<Result<Vec<_>>>()?;
            let errors = outcomes.iter().filter(|o| o.0).count() as f64;
            let e = errors / trials as f64;
            if e > epsilon {
                epsilon = e;
                stderr = (e * (1.0 - e) / trials as f64).sqrt();
            }
            let mut tally = BTreeMap::new();
            for (_, h) in outcomes {
                *tally.entry(h).or_insert(0u64) += 1;
            }
            tallies.push(tally);
        }
        for i in 0..tallies.len() {
            for j in i + 1..tallies.len() {
                delta = delta.max(empirical_tv(&tallies[i], &tallies[j], trials));
            }
        }
    }
    let mut warnings =
        vec!["delta is the plug-in TV between empirical histogram frequencies and is biased upward".to_string()];
    let epsilon_stderr = if trials == 1 {
        warnings.push("degenerate run: a single trial gives no standard error".into());
        None
    } else {
        Some(stderr)
    };
    Ok(EvaluationReport {
        epsilon,
        delta,
        comm_bits: scheme.comm_bits(),
        key_bits: scheme.key_bits(),
        method: Method::MonteCarlo,
        trials: Some(trials),
        seed: Some(seed),
        epsilon_stderr,
        warnings,
    })
}

fn empirical_tv(a: &BTreeMap<Vec<usize>, u64>, b: &BTreeMap<Vec<usize>, u64>, trials: u64) -> f64 {
    let mut s: i64 = 0;
    for (k, &va) in a {
        s += (va as i64 - *b.get(k).unwrap_or(&0) as i64).abs();
    }
    for (k, &vb) in b {
        if !a.contains_key(k) {
            s += vb as i64;
        }
    }
    s as f64 / (2.0 * trials as f64)
}

fn max_entry_gap(a: &FiniteDistribution, b: &FiniteDistribution) -> f64 {
    a.probs().iter().zip(b.probs()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Keyless scheme from a channel that merges each class to one output law,
/// decided by the minimax histogram test between the two i.i.d. laws.
pub fn build_prop1_scheme(
    w: &Channel,
    h0: &[FiniteDistribution],
    h1: &[FiniteDistribution],
    n: usize,
) -> Result<KeyedScheme> {
    let class_output = |class: &[FiniteDistribution], name: &str| -> Result<FiniteDistribution> {
        let outs = class.iter().map(|mu| push_forward(w, mu)).collect::<Result<Vec<_>>>()?;
        let Some(first) = outs.first() else {
            return Err(SdhtError::InvalidArgument(format!("{name} is empty")));
        };
        if let Some(bad) = outs.iter().find(|o| max_entry_gap(o, first) > PUSHFORWARD_TOL) {
            return Err(SdhtError::NotSeparating(format!(
                "{name} members map to different outputs ({:?} vs {:?})",
                first.probs(),
                bad.probs()
            )));
        }
        Ok(first.clone())
    };
    let p0 = class_output(h0, "H0")?;
    let p1 = class_output(h1, "H1")?;
    if max_entry_gap(&p0, &p1) <= PUSHFORWARD_TOL {
        return Err(SdhtError::NotSeparating("both classes map to the same output".into()));
    }
    let detector = minimax_histogram_detector(&iid_law(&p0, n)?, &iid_law(&p1, n)?)?;
    KeyedScheme::keyless(n, w.clone(), detector)
}

/// Likelihood-ratio detector between two exchangeable laws whose threshold
/// minimizes the larger of the two error probabilities.
pub fn minimax_lr_detector(null: &ExchangeableLaw, alternative: &ExchangeableLaw) -> Result<DetectorSpec> {
    check_dim(null.n(), alternative.n())?;
    check_dim(null.alphabet_size(), alternative.alphabet_size())?;
    check_budget(histogram_count(null.n(), null.alphabet_size()))?;
    let mut cells = Vec::new();
    for_each_histogram(null.n(), null.alphabet_size(), |h| {
        let lm = h.ln_multinomial();
        let p0 = (lm + null.ln_sequence_prob(h)).exp();
        let p1 = (lm + alternative.ln_sequence_prob(h)).exp();
        cells.push((log_likelihood_ratio(null, alternative, h), p0, p1));
    });
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Groups of (llr, null mass, alternative mass).
    let mut groups: Vec<(f64, f64, f64)> = Vec::new();
    for (l, p0, p1) in cells {
        match groups.last_mut() {
            Some(g) if (l - g.0).abs() <= LLR_GROUP || (l == g.0) => {
                g.1 += p0;
                g.2 += p1;
            }
            _ => groups.push((l, p0, p1)),
        }
    }
    // Cut c: groups[c..] decide 1.
    let mut e0: f64 = groups.iter().map(|g| g.1).sum();
    let mut e1 = 0.0;
    let mut best = (e0.max(e1), 0usize);
    for (c, g) in groups.iter().enumerate() {
        e0 -= g.1;
        e1 += g.2;
        if e0.max(e1) < best.0 - 1e-15 {
            best = (e0.max(e1), c + 1);
        }
    }
    let cut = best.1;
    let log_threshold = if cut == 0 {
        finite_or(groups[0].0 - 1.0, -f64::MAX)
    } else if cut == groups.len() {
        finite_or(groups[cut - 1].0 + 1.0, f64::MAX)
    } else {
        let (lo, hi) = (groups[cut - 1].0, groups[cut].0);
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => 0.5 * (lo + hi),
            (true, false) => lo + 1.0,
            (false, true) => hi - 1.0,
            _ => 0.0,
        }
    };
    Ok(DetectorSpec::LikelihoodRatio { null: null.clone(), alternative: alternative.clone(), log_threshold })
}

/// Largest histogram count searched exactly by [`minimax_histogram_detector`].
pub const SUBSET_SEARCH_CELLS: usize = 512;
const SUBSET_SEARCH_NODES: u64 = 2_000_000;

struct SubsetSearch<'a> {
    p0: &'a [f64],
    p1: &'a [f64],
    chosen: Vec<bool>,
    best: f64,
    best_set: Vec<bool>,
    nodes: u64,
}

impl SubsetSearch<'_> {
    /// Fractional relaxation: fill the remaining cells in ratio order until
    /// the two error terms cross.
    fn lower_bound(&self, from: usize, mut s0: f64, mut s1: f64) -> f64 {
        if s0 >= 1.0 - s1 {
            return s0;
        }
        for i in from..self.p0.len() {
            let (a, b) = (self.p0[i], self.p1[i]);
            if s0 + a >= 1.0 - s1 - b {
                let t = (1.0 - s1 - s0) / (a + b);
                return s0 + t * a;
            }
            s0 += a;
            s1 += b;
        }
        1.0 - s1
    }

    fn visit(&mut self, i: usize, s0: f64, s1: f64) {
        self.nodes += 1;
        let value = s0.max(1.0 - s1);
        if value < self.best - 1e-15 {
            self.best = value;
            self.best_set.clone_from(&self.chosen);
        }
        if i == self.p0.len() || self.nodes > SUBSET_SEARCH_NODES {
            return;
        }
        if self.lower_bound(i, s0, s1) >= self.best - 1e-15 {
            return;
        }
        self.chosen[i] = true;
        self.visit(i + 1, s0 + self.p0[i], s1 + self.p1[i]);
        self.chosen[i] = false;
        self.visit(i + 1, s0, s1);
    }
}

/// Deterministic histogram test minimizing max(P_null[decide 1], P_alt[decide 0]).
///
/// Searches subsets of histograms by branch and bound in likelihood-ratio
/// order, starting from the best threshold cut. Exact when the histogram
/// count is at most [`SUBSET_SEARCH_CELLS`] and the node budget is not
/// exhausted; otherwise the best threshold (or the best set found) is used.
pub fn minimax_histogram_detector(null: &ExchangeableLaw, alternative: &ExchangeableLaw) -> Result<DetectorSpec> {
    check_dim(null.n(), alternative.n())?;
    check_dim(null.alphabet_size(), alternative.alphabet_size())?;
    check_budget(histogram_count(null.n(), null.alphabet_size()))?;
    let mut cells: Vec<(f64, Vec<usize>, f64, f64)> = Vec::new();
    for_each_histogram(null.n(), null.alphabet_size(), |h| {
        let lm = h.ln_multinomial();
        let p0 = (lm + null.ln_sequence_prob(h)).exp();
        let p1 = (lm + alternative.ln_sequence_prob(h)).exp();
        if p0 > 0.0 || p1 > 0.0 {
            cells.push((log_likelihood_ratio(null, alternative, h), h.counts().to_vec(), p0, p1));
        }
    });
    cells.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    let p0: Vec<f64> = cells.iter().map(|c| c.2).collect();
    let p1: Vec<f64> = cells.iter().map(|c| c.3).collect();

    // Best prefix (threshold) cut.
    let (mut s0, mut s1) = (0.0, 0.0);
    let mut cut = (1.0f64, 0usize);
    for i in 0..cells.len() {
        s0 += p0[i];
        s1 += p1[i];
        let v = s0.max(1.0 - s1);
        if v < cut.0 - 1e-15 {
            cut = (v, i + 1);
        }
    }
    let mut search = SubsetSearch {
        p0: &p0,
        p1: &p1,
        chosen: vec![false; cells.len()],
        best: cut.0,
        best_set: (0..cells.len()).map(|i| i < cut.1).collect(),
        nodes: 0,
    };
    if cells.len() <= SUBSET_SEARCH_CELLS {
        search.visit(0, 0.0, 0.0);
    }
    let mut accept: Vec<Vec<usize>> =
        cells.iter().zip(&search.best_set).filter(|(_, &keep)| keep).map(|(c, _)| c.1.clone()).collect();
    accept.sort();
    Ok(DetectorSpec::AcceptSet { n: null.n(), alphabet_size: null.alphabet_size(), accept })
}

fn finite_or(v: f64, fallback: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        fallback
    }
}

/// How the one-bit scheme was assembled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "route", rename_all = "snake_case")]
pub enum OnebitRoute {
    /// Non-collinear triple: keyless separating channel.
    Separating { margin: f64 },
    /// Collinear triple: sign channel, symmetrizer, then XOR with the key bit.
    Symmetrized { p: f64, q: f64, slope: f64, intercept: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnebitConstruction {
    pub scheme: KeyedScheme,
    pub route: OnebitRoute,
}

/// Scheme for H0 = {μ0, μ1} vs H1 = {μ2} using at most one shared key bit.
pub fn onebit_construction(
    mu0: &FiniteDistribution,
    mu1: &FiniteDistribution,
    mu2: &FiniteDistribution,
    n: usize,
) -> Result<OnebitConstruction> {
    check_dim(mu0.alphabet_size(), mu1.alphabet_size())?;
    check_dim(mu0.alphabet_size(), mu2.alphabet_size())?;
    if mu0 == mu1 || mu0 == mu2 || mu1 == mu2 {
        return Err(SdhtError::InvalidArgument("the three distributions must be pairwise distinct".into()));
    }
    let h0 = [mu0.clone(), mu1.clone()];
    let h1 = [mu2.clone()];
    match collinearity_check(mu0, mu1, mu2)? {
        None => {
            let sep = separating_channel(mu0, mu1, mu2)?;
            let scheme = build_prop1_scheme(&sep.channel, &h0, &h1, n)?;
            Ok(OnebitConstruction { scheme, route: OnebitRoute::Separating { margin: sep.margin } })
        }
        Some(_) => {
            let sign = sign_channel(mu0, mu1)?;
            let mean = |mu: &FiniteDistribution| push_forward(&sign, mu).map(|d| d.get(1));
            let sym = bernoulli_symmetrizer(mean(mu0)?, mean(mu1)?, mean(mu2)?)?;
            let base = compose(&sym.channel, &sign)?;
            let flipped = compose(&Channel::flip(), &base)?;
            let placeholder = DetectorSpec::Constant { label: 0 };
            let mut scheme = KeyedScheme::new(n, 2, SchemeChannels::Identical(vec![base, flipped]), placeholder)?;
            let null = message_law(&scheme, mu0)?;
            let alternative = message_law(&scheme, mu2)?;
            scheme.detector = minimax_lr_detector(&null, &alternative)?;
            Ok(OnebitConstruction {
                scheme,
                route: OnebitRoute::Symmetrized { p: sym.p, q: sym.q, slope: sym.slope, intercept: sym.intercept },
            })
        }
    }
}

pub fn build_onebit_scheme(
    mu0: &FiniteDistribution,
    mu1: &FiniteDistribution,
    mu2: &FiniteDistribution,
    n: usize,
) -> Result<KeyedScheme> {
    onebit_construction(mu0, mu1, mu2, n).map(|c| c.scheme)
}

/// The resampled sequence Z with `Z_i = Y_i` w.p. θ and `Z_i ~ resample` otherwise.
pub fn resampled_messages(
    resample_marginal: &FiniteDistribution,
    theta: f64,
    messages: &[usize],
    seed: u64,
) -> Result<Vec<usize>> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(SdhtError::InvalidArgument(format!("theta {theta} outside (0,1)")));
    }
    let m = resample_marginal.alphabet_size();
    if let Some(y) = messages.iter().find(|&&y| y >= m) {
        return Err(SdhtError::InvalidArgument(format!("message {y} outside alphabet of size {m}")));
    }
    let s = sampler(resample_marginal.probs());
    let mut rng = stream_rng(seed, 0);
    Ok(messages
        .iter()
        .map(|&y| {
            let keep = rng.gen::<f64>() < theta;
            let fresh = draw(&s, &mut rng);
            if keep {
                y
            } else {
                fresh
            }
        })
        .collect())
}

/// Randomized detector: runs `detector` on the resampled sequence.
pub fn det_prime(
    detector: &DetectorSpec,
    resample_marginal: &FiniteDistribution,
    theta: f64,
    messages: &[usize],
    seed: u64,
) -> Result<u8> {
    if let Some(n) = detector.expected_len() {
        check_dim(n, messages.len())?;
    }
    let z = resampled_messages(resample_marginal, theta, messages, seed)?;
    detector.decide_sequence(&z, resample_marginal.alphabet_size())
}

/// Two-point lower bound (1 − TV)/2 on the ε of any detector separating two laws.
pub fn epsilon_lower_bound(null: &ExchangeableLaw, alternative: &ExchangeableLaw) -> Result<f64> {
    Ok((1.0 - law_tv(null, alternative)?) / 2.0)
}
