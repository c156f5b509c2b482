//! Stochastic channels and the constructions built from them.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result, SdhtError};
use crate::prob::{hellinger_sq, sqrt_diff_sq, FiniteDistribution, SUM_TOLERANCE};

/// Row-stochastic matrix: `rows[x][y]` is the probability of output `y` on input `x`.
///
/// Serializes as a row-major JSON matrix, e.g. `[[0.9, 0.1], [0.2, 0.8]]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Channel {
    rows: Vec<Vec<f64>>,
}

impl TryFrom<Vec<Vec<f64>>> for Channel {
    type Error = SdhtError;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<Channel> for Vec<Vec<f64>> {
    fn from(c: Channel) -> Self {
        c.rows
    }
}

impl Channel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(SdhtError::InvalidArgument("channel needs at least one input".into()));
        };
        let m = first.len();
        for row in &rows {
            check_dim(m, row.len())?;
            FiniteDistribution::new(row.clone())?;
        }
        Ok(Self { rows })
    }

    /// Rows that are stochastic up to rounding; tiny excursions are clamped.
    pub(crate) fn from_raw(rows: Vec<Vec<f64>>) -> Result<Self> {
        let rows =
            rows.into_iter().map(|r| FiniteDistribution::from_raw(r).map(Vec::from)).collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    pub fn identity(m: usize) -> Result<Self> {
        Self::deterministic(&(0..m).collect::<Vec<_>>(), m)
    }

    /// Every input goes to `symbol`.
    pub fn constant(inputs: usize, outputs: usize, symbol: usize) -> Result<Self> {
        Self::deterministic(&vec![symbol; inputs], outputs)
    }

    /// Input `x` goes to `map[x]`.
    pub fn deterministic(map: &[usize], outputs: usize) -> Result<Self> {
        let rows = map
            .iter()
            .map(|&y| FiniteDistribution::point_mass(outputs, y).map(Vec::from))
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    /// Binary channel with `W(1|x) = ones[x]`.
    pub fn binary_from_ones(ones: &[f64]) -> Result<Self> {
        Self::new(ones.iter().map(|&v| vec![1.0 - v, v]).collect())
    }

    /// Binary channel on binary inputs that flips its input.
    pub fn flip() -> Self {
        Self { rows: vec![vec![0.0, 1.0], vec![1.0, 0.0]] }
    }

    pub fn input_size(&self) -> usize {
        self.rows.len()
    }

    pub fn output_size(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.rows[x]
    }

    pub fn row_distribution(&self, x: usize) -> FiniteDistribution {
        FiniteDistribution::new(self.rows[x].clone()).expect("rows are validated")
    }

    pub fn entry(&self, x: usize, y: usize) -> f64 {
        self.rows[x][y]
    }

    /// True if every row is the same distribution (the output ignores the input).
    pub fn has_equal_rows(&self) -> bool {
        self.rows.iter().all(|r| r == &self.rows[0])
    }
}

pub fn push_forward(w: &Channel, mu: &FiniteDistribution) -> Result<FiniteDistribution> {
    check_dim(w.input_size(), mu.alphabet_size())?;
    let mut out = vec![0.0; w.output_size()];
    for (row, &p) in w.rows.iter().zip(mu.probs()) {
        for (o, &v) in out.iter_mut().zip(row) {
            *o += p * v;
        }
    }
    FiniteDistribution::from_raw(out)
}

/// `(W∘R)(y|u) = Σ_x R(x|u)·W(y|x)`.
pub fn compose(w: &Channel, r: &Channel) -> Result<Channel> {
    check_dim(w.input_size(), r.output_size())?;
    let rows = r
        .rows
        .iter()
        .map(|ru| {
            let mut out = vec![0.0; w.output_size()];
            for (x, &p) in ru.iter().enumerate() {
                for (o, &v) in out.iter_mut().zip(&w.rows[x]) {
                    *o += p * v;
                }
            }
            out
        })
        .collect();
    Channel::from_raw(rows)
}

/// Witness that `theta·μ_a + (1−theta)·μ_b = μ_c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollinearityWitness {
    pub theta: f64,
    pub a: usize,
    pub b: usize,
    pub c: usize,
    /// Two of the three inputs coincide.
    pub degenerate: bool,
}

const COLLINEAR_TOL: f64 = 1e-10;

fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

pub fn collinearity_check(
    mu0: &FiniteDistribution,
    mu1: &FiniteDistribution,
    mu2: &FiniteDistribution,
) -> Result<Option<CollinearityWitness>> {
    check_dim(mu0.alphabet_size(), mu1.alphabet_size())?;
    check_dim(mu0.alphabet_size(), mu2.alphabet_size())?;
    let mus = [mu0.probs(), mu1.probs(), mu2.probs()];

    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        if max_abs_diff(mus[i], mus[j]) <= SUM_TOLERANCE {
            let k = 3 - i - j;
            return Ok(Some(CollinearityWitness { theta: 1.0, a: i, b: k, c: j, degenerate: true }));
        }
    }

    for c in 0..3 {
        let (a, b) = match c {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        // Least squares for theta in theta·(μa−μb) = μc−μb.
        let d: Vec<f64> = mus[a].iter().zip(mus[b]).map(|(x, y)| x - y).collect();
        let t: Vec<f64> = mus[c].iter().zip(mus[b]).map(|(x, y)| x - y).collect();
        let dd: f64 = d.iter().map(|x| x * x).sum();
        let theta = d.iter().zip(&t).map(|(x, y)| x * y).sum::<f64>() / dd;
        if !(-COLLINEAR_TOL..=1.0 + COLLINEAR_TOL).contains(&theta) {
            continue;
        }
        let theta = theta.clamp(0.0, 1.0);
        let fitted: Vec<f64> = mus[a].iter().zip(mus[b]).map(|(x, y)| theta * x + (1.0 - theta) * y).collect();
        if max_abs_diff(&fitted, mus[c]) <= COLLINEAR_TOL {
            return Ok(Some(CollinearityWitness { theta, a, b, c, degenerate: false }));
        }
    }
    Ok(None)
}

/// Binary-output channel that sends μ0 and μ1 to one distribution and μ2 elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatingChannel {
    pub channel: Channel,
    /// `P_{μ0}[Y=1] − P_{μ2}[Y=1]` as constructed.
    pub margin: f64,
}

/// Interior margin kept between `W(1|x)` and the ends of [0,1].
pub const SEPARATING_INTERIOR: f64 = 1e-6;

pub fn separating_channel(
    mu0: &FiniteDistribution,
    mu1: &FiniteDistribution,
    mu2: &FiniteDistribution,
) -> Result<SeparatingChannel> {
    if let Some(w) = collinearity_check(mu0, mu1, mu2)? {
        return Err(SdhtError::ConstructionImpossible(format!(
            "triple is collinear (theta={}, a={}, b={}, c={}); no keyless channel can merge one class and separate the other",
            w.theta, w.a, w.b, w.c
        )));
    }
    let u1: Vec<f64> = mu0.probs().iter().zip(mu1.probs()).map(|(a, b)| a - b).collect();
    let u2: Vec<f64> = mu0.probs().iter().zip(mu2.probs()).map(|(a, b)| a - b).collect();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let proj = dot(&u2, &u1) / dot(&u1, &u1);
    let v: Vec<f64> = u2.iter().zip(&u1).map(|(a, b)| a - proj * b).collect();
    let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let scale = (0.5 - SEPARATING_INTERIOR) / vmax;
    let channel = separating_channel_from_direction(&v, scale)?;
    let margin = scale * dot(&v, &u2);
    Ok(SeparatingChannel { channel, margin })
}

/// Binary channel with `W(1|x) = scale·v[x] + 1/2`.
pub fn separating_channel_from_direction(v: &[f64], scale: f64) -> Result<Channel> {
    let ones: Vec<f64> = v.iter().map(|x| scale * x + 0.5).collect();
    if ones.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(SdhtError::InvalidArgument(format!("scale {scale} pushes W(1|x) outside [0,1]")));
    }
    Channel::binary_from_ones(&ones)
}

/// Deterministic binary channel: `x ↦ 1` iff `μ0(x) > μ1(x)`.
pub fn sign_channel(mu0: &FiniteDistribution, mu1: &FiniteDistribution) -> Result<Channel> {
    check_dim(mu0.alphabet_size(), mu1.alphabet_size())?;
    if mu0 == mu1 {
        return Err(SdhtError::InvalidArgument("sign channel needs distinct distributions".into()));
    }
    let map: Vec<usize> = mu0.probs().iter().zip(mu1.probs()).map(|(a, b)| usize::from(a > b)).collect();
    Channel::deterministic(&map, 2)
}

/// Affine binary channel that maps Ber(p0), Ber(p1) to a complementary pair.
///
/// Convention: under Ber(t) (so `P[X=1] = t`) the channel gives
/// `f(t) = P[Y=0] = (1−t)·W(0|0) + t·W(0|1) = intercept + slope·t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Symmetrizer {
    pub channel: Channel,
    pub slope: f64,
    pub intercept: f64,
    /// f(p0); f(p1) = 1 − p.
    pub p: f64,
    /// f(p2).
    pub q: f64,
}

pub fn bernoulli_symmetrizer(p0: f64, p1: f64, p2: f64) -> Result<Symmetrizer> {
    for v in [p0, p1, p2] {
        if !(0.0..=1.0).contains(&v) {
            return Err(SdhtError::InvalidArgument(format!("{v} is not a Bernoulli mean")));
        }
    }
    if p0 == p1 {
        return Err(SdhtError::DegenerateClass(format!("p0 = p1 = {p0}")));
    }
    if p2 == p0 || p2 == p1 {
        return Err(SdhtError::ClassesNotDistinct(format!("p2 = {p2} is in the null class")));
    }
    let s = p0 + p1;
    let slope = (1.0 / (2.0 - s)).min(1.0 / s);
    let intercept = 0.5 - slope * s / 2.0;
    let f = |t: f64| intercept + slope * t;
    let w00 = intercept.clamp(0.0, 1.0);
    let w01 = (intercept + slope).clamp(0.0, 1.0);
    let channel = Channel::new(vec![vec![w00, 1.0 - w00], vec![w01, 1.0 - w01]])?;
    Ok(Symmetrizer { channel, slope, intercept, p: f(p0), q: f(p2) })
}

/// Merges output symbols `i` and `j`; the merged column takes the smaller index.
pub fn merge_symbols(w: &Channel, i: usize, j: usize) -> Result<Channel> {
    let m = w.output_size();
    if i == j || i >= m || j >= m {
        return Err(SdhtError::InvalidArgument(format!("cannot merge symbols {i} and {j} of {m}")));
    }
    let (keep, drop) = (i.min(j), i.max(j));
    let rows = w
        .rows
        .iter()
        .map(|r| {
            let mut out = r.clone();
            out[keep] += out[drop];
            out.remove(drop);
            out
        })
        .collect();
    Channel::from_raw(rows)
}

/// Change in H² between the pushforwards of Ber(p) and Ber(q) caused by
/// merging symbols `i` and `j`, from the per-symbol contributions.
pub fn merge_hellinger_delta(w: &Channel, i: usize, j: usize, p: f64, q: f64) -> Result<f64> {
    check_binary_input(w)?;
    let out = |y: usize, t: f64| (1.0 - t) * w.entry(0, y) + t * w.entry(1, y);
    let separate = sqrt_diff_sq(out(i, p), out(i, q)) + sqrt_diff_sq(out(j, p), out(j, q));
    let merged = sqrt_diff_sq(out(i, p) + out(j, p), out(i, q) + out(j, q));
    Ok(separate - merged)
}

/// H² between the pushforwards of Ber(p) and Ber(q) through a binary-input channel.
pub fn bernoulli_pushforward_hellinger(w: &Channel, p: f64, q: f64) -> Result<f64> {
    check_binary_input(w)?;
    let a = push_forward(w, &FiniteDistribution::bernoulli(p)?)?;
    let b = push_forward(w, &FiniteDistribution::bernoulli(q)?)?;
    hellinger_sq(&a, &b)
}

pub(crate) fn check_binary_input(w: &Channel) -> Result<()> {
    check_dim(2, w.input_size())
}

/// Orders `(a0, a1)` against `(b0, b1)` by the ratio `x0/x1`, with zero
/// denominators counting as +∞. Columns that are zero in both rows are not
/// comparable and must be removed first.
pub fn cmp_ratio(a: (f64, f64), b: (f64, f64)) -> Ordering {
    let lhs = a.0 * b.1;
    let rhs = b.0 * a.1;
    if (lhs - rhs).abs() <= 1e-15 {
        Ordering::Equal
    } else {
        lhs.total_cmp(&rhs)
    }
}

fn column(w: &Channel, y: usize) -> (f64, f64) {
    (w.entry(0, y), w.entry(1, y))
}

/// Output symbols in ascending likelihood-ratio order, ties by index.
pub fn likelihood_ratio_order(w: &Channel) -> Result<Vec<usize>> {
    check_binary_input(w)?;
    let mut idx: Vec<usize> = (0..w.output_size()).collect();
    idx.sort_by(|&i, &j| cmp_ratio(column(w, i), column(w, j)).then(i.cmp(&j)));
    Ok(idx)
}

/// Permutes output columns into ascending likelihood-ratio order.
pub fn sort_by_likelihood_ratio(w: &Channel) -> Result<Channel> {
    let order = likelihood_ratio_order(w)?;
    let rows = w.rows.iter().map(|r| order.iter().map(|&y| r[y]).collect()).collect();
    Channel::new(rows)
}

pub fn is_ratio_sorted(w: &Channel) -> bool {
    (1..w.output_size()).all(|y| cmp_ratio(column(w, y - 1), column(w, y)) != Ordering::Greater)
}

/// Moves a γ share of each row onto the lowest-ratio symbol (column 0):
/// column 0 becomes `(1−γ)·α + γ`, the others scale by `1−γ`.
pub fn gamma_transform(w: &Channel, gamma: f64) -> Result<Channel> {
    check_binary_input(w)?;
    if !(0.0..=1.0).contains(&gamma) {
        return Err(SdhtError::InvalidArgument(format!("gamma {gamma} outside [0,1]")));
    }
    if !is_ratio_sorted(w) {
        return Err(SdhtError::Ordering(
            "output symbols must be in ascending W(y|0)/W(y|1) order; apply sort_by_likelihood_ratio first".into(),
        ));
    }
    let rows = w
        .rows
        .iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .map(|(y, &a)| if y == 0 { (1.0 - gamma) * a + gamma } else { (1.0 - gamma) * a })
                .collect()
        })
        .collect();
    Channel::from_raw(rows)
}

/// The γ that lifts the ratio a0/a1 to b0/b1 under [`gamma_transform`].
pub fn gamma_star(a0: f64, a1: f64, b0: f64, b1: f64) -> Result<f64> {
    if [a0, a1, b0, b1].iter().any(|x| !(*x >= 0.0)) || a1 <= 0.0 || b1 <= 0.0 {
        return Err(SdhtError::Ordering("entries must be non-negative with positive denominators".into()));
    }
    let n = a1 * b0 - a0 * b1;
    let m = b1 - b0;
    if m < 0.0 {
        return Err(SdhtError::Ordering(format!("b0/b1 = {} exceeds 1", b0 / b1)));
    }
    if n.abs() <= 1e-15 {
        return Ok(0.0);
    }
    if n < 0.0 {
        return Err(SdhtError::Ordering(format!("a0/a1 = {} exceeds b0/b1 = {}", a0 / a1, b0 / b1)));
    }
    Ok(n / (m + n))
}

/// Removes mass `x` from symbol `y` in both rows and renormalizes; the
/// inverse of moving a share of each row onto `y`.
pub fn inverse_gamma_transform(w: &Channel, y: usize, x: f64) -> Result<Channel> {
    check_binary_input(w)?;
    if y >= w.output_size() || !(0.0..1.0).contains(&x) || x > w.entry(0, y).min(w.entry(1, y)) + 1e-15 {
        return Err(SdhtError::InvalidArgument(format!("cannot remove mass {x} from symbol {y}")));
    }
    let rows = w
        .rows
        .iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .map(|(k, &a)| if k == y { (a - x).max(0.0) / (1.0 - x) } else { a / (1.0 - x) })
                .collect()
        })
        .collect();
    Channel::from_raw(rows)
}
