//! Numerical checks of the Hellinger-ratio bounds behind the impossibility
//! result for one-bit-per-client schemes without shared keys.
//!
//! Throughout, a binary-input channel W and a mixing weight θ give three
//! output laws P0 = W(·|0), P2 = W(·|1) and P1 = (1−θ)·P0 + θ·P2, and the
//! quantity of interest is H²(P1, P2) / H²(P0, P1).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{
    cmp_ratio, gamma_star, gamma_transform, inverse_gamma_transform, merge_symbols, sort_by_likelihood_ratio, Channel,
};
use crate::error::{Result, SdhtError};
use crate::prob::{
    bernoulli_hellinger_sq, hellinger_sq, iid_law, law_tv, sqrt_diff_sq, ExchangeableLaw, FiniteDistribution,
};

/// Binary-output instance: W(1|1) = a, W(1|0) = a + c.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioInstance {
    pub theta: f64,
    pub a: f64,
    pub c: f64,
    /// (1−θ)·c, the gap between P1 and P2.
    pub c_prime: f64,
    /// 1/(1−θ); infinite at θ = 1.
    pub k: f64,
}

impl RatioInstance {
    pub fn new(theta: f64, a: f64, c: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(SdhtError::InvalidArgument(format!("theta = {theta} outside (0, 1]")));
        }
        if !(a >= 0.0 && c >= 0.0 && a + c <= 1.0 + 1e-15) {
            return Err(SdhtError::InvalidArgument(format!("need a, c ≥ 0 and a + c ≤ 1, got a = {a}, c = {c}")));
        }
        Ok(Self { theta, a, c, c_prime: (1.0 - theta) * c, k: 1.0 / (1.0 - theta) })
    }

    /// Instance of a binary channel whose row 0 has the larger probability of symbol 1.
    pub fn from_channel(w: &Channel, theta: f64) -> Result<Self> {
        if w.input_size() != 2 || w.output_size() != 2 {
            return Err(SdhtError::Dimension { expected: 2, got: w.output_size() });
        }
        let (q0, q1) = (w.entry(0, 1), w.entry(1, 1));
        if q0 < q1 {
            return Err(SdhtError::Ordering("instance needs W(1|0) ≥ W(1|1); swap output labels".into()));
        }
        Self::new(theta, q1, q0 - q1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioValue {
    pub value: f64,
    /// Set when c = 0 or c′ = 0 and the value is defined as 0.
    pub degenerate: bool,
}

/// f(a, c) = H²(Ber a, Ber(a+c′)) / H²(Ber(a+c′), Ber(a+c)).
pub fn hellinger_ratio_f(inst: &RatioInstance) -> RatioValue {
    let (a, c, cp) = (inst.a, inst.c, inst.c_prime);
    let num = bernoulli_hellinger_sq(a, a + cp);
    let den = bernoulli_hellinger_sq(a + cp, (a + c).min(1.0));
    if c == 0.0 || cp == 0.0 || den == 0.0 {
        return RatioValue { value: 0.0, degenerate: true };
    }
    RatioValue { value: num / den, degenerate: false }
}

/// Bound on the ratio along the edge a + c = 1.
pub fn boundary_bound(theta: f64) -> f64 {
    1.0 + 2.0 * (1.0 - theta.sqrt()) / theta
}

/// f(1−c, c), the edge where W(1|0) = 1. Errors if the edge bound fails.
pub fn boundary_ratio(theta: f64, c: f64) -> Result<f64> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(SdhtError::InvalidArgument(format!("c = {c} outside (0, 1]")));
    }
    let v = hellinger_ratio_f(&RatioInstance::new(theta, 1.0 - c, c)?).value;
    if v > boundary_bound(theta) + 1e-9 {
        return Err(SdhtError::BoundViolated(format!("edge ratio {v} exceeds {}", boundary_bound(theta))));
    }
    Ok(v)
}

/// Limit of [`boundary_ratio`] as c → 0: (1−√θ)²/θ.
pub fn boundary_ratio_limit(theta: f64) -> f64 {
    (1.0 - theta.sqrt()).powi(2) / theta
}

/// Closed form of f(0, c) in terms of k = 1/(1−θ).
pub fn f0c_closed_form(c: f64, theta: f64) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return Err(SdhtError::InvalidArgument(format!("c = {c} outside (0, 1)")));
    }
    check_theta(theta)?;
    let k = 1.0 / (1.0 - theta);
    let sk = k.sqrt();
    Ok((sk - c + ((1.0 - c) * (k - c)).sqrt()) / ((sk + (k - c).sqrt()) * (sk - 1.0).powi(2)))
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < 1.0 {
        Ok(())
    } else {
        Err(SdhtError::DegenerateClass(format!("theta = {theta} must lie in (0, 1)")))
    }
}

/// lim_{c→0} f(0, c) = 1/(√k − 1)².
pub fn ratio_limit(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    let k = 1.0 / (1.0 - theta);
    Ok(1.0 / (k.sqrt() - 1.0).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Check {
    /// Quotient form; `None` when p = q.
    pub lhs: Option<f64>,
    /// Factored form.
    pub rhs: f64,
    pub gap: Option<f64>,
    pub indeterminate: bool,
}

/// Compares the quotient form of h_q(p) with its factored form.
///
/// The quotient is evaluated with both numerator terms rewritten as squared
/// root differences so it stays accurate near p = q.
pub fn lemma1_identity_check(p: f64, q: f64) -> Result<Lemma1Check> {
    if !(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0) {
        return Err(SdhtError::InvalidArgument(format!("p = {p}, q = {q} must lie in (0, 1)")));
    }
    let a = (p * q).sqrt();
    let b = ((1.0 - p) * (1.0 - q)).sqrt();
    let rhs = -(b - a) * (1.0 + a + b) / (2.0 * a * b);
    if p == q {
        return Ok(Lemma1Check { lhs: None, rhs, gap: None, indeterminate: true });
    }
    let num = sqrt_diff_sq(1.0 - p, 1.0 - q) / (2.0 * b) - sqrt_diff_sq(p, q) / (2.0 * a);
    let den = 0.5 * bernoulli_hellinger_sq(p, q);
    let lhs = num / den;
    Ok(Lemma1Check { lhs: Some(lhs), rhs, gap: Some((lhs - rhs).abs()), indeterminate: false })
}

/// The quotient form of h_q(p) exactly as written, without rewriting.
pub fn lemma1_lhs_literal(p: f64, q: f64) -> f64 {
    let a = (p * q).sqrt();
    let b = ((1.0 - p) * (1.0 - q)).sqrt();
    (-(p + q) / (2.0 * a) + (2.0 - p - q) / (2.0 * b)) / (1.0 - a - b)
}

/// K(t) = (1−√s)² / (√t−√s)² with s = θ + (1−θ)t, continuously extended at t = 1.
pub fn k_of_t(t: f64, theta: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(SdhtError::InvalidArgument(format!("t = {t} must be positive")));
    }
    check_theta(theta)?;
    let s = theta + (1.0 - theta) * t;
    let r = (1.0 - theta) / theta * (t.sqrt() + s.sqrt()) / (1.0 + s.sqrt());
    Ok(r * r)
}

/// K(t) as written, undefined at t = 1.
pub fn k_of_t_literal(t: f64, theta: f64) -> f64 {
    let s = theta + (1.0 - theta) * t;
    (1.0 - s.sqrt()).powi(2) / (t.sqrt() - s.sqrt()).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub a: f64,
    pub c: f64,
    pub ratio: f64,
}

/// Points of the (a, c) search grid: a uniform grid of step 1/resolution over
/// a + c ≤ 1 (the a + c = 1 edge included) and a log-spaced corner near (0, 0).
pub fn ratio_grid_points(resolution: usize) -> Vec<(f64, f64)> {
    let h = 1.0 / resolution as f64;
    let mut pts = Vec::new();
    for i in 0..resolution {
        for j in 1..=(resolution - i) {
            pts.push((i as f64 * h, j as f64 * h));
        }
    }
    let corner: Vec<f64> = (0..=48).map(|e| 10f64.powf(-(e as f64) / 4.0) * h).collect();
    for &c in &corner {
        pts.push((0.0, c));
        for &a in &corner {
            pts.push((a, c));
        }
    }
    pts
}

pub fn ratio_grid(theta: f64, resolution: usize) -> Result<Vec<GridPoint>> {
    check_theta(theta)?;
    Ok(ratio_grid_points(resolution)
        .into_par_iter()
        .map(|(a, c)| {
            let inst = RatioInstance::new(theta, a, c.min(1.0 - a)).expect("grid point is admissible");
            GridPoint { a, c: inst.c, ratio: hellinger_ratio_f(&inst).value }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupResult {
    pub theta: f64,
    pub max_value: f64,
    pub argmax: GridPoint,
    pub limit: f64,
}

/// Grid maximum of f over admissible (a, c).
pub fn sup_ratio_binary(theta: f64, resolution: usize) -> Result<SupResult> {
    if resolution < 100 {
        return Err(SdhtError::InvalidArgument(format!("resolution {resolution} below 100")));
    }
    let limit = ratio_limit(theta)?;
    let argmax = ratio_grid(theta, resolution)?
        .into_iter()
        .max_by(|x, y| x.ratio.total_cmp(&y.ratio))
        .expect("grid is non-empty");
    Ok(SupResult { theta, max_value: argmax.ratio, argmax, limit })
}

/// Reciprocal of the grid supremum: the smallest H²(P0,P1)/H²(P1,P2) seen.
pub fn lambda_inf(theta: f64, resolution: usize) -> Result<f64> {
    Ok(1.0 / sup_ratio_binary(theta, resolution)?.max_value)
}

/// H²(P1, P2) / H²(P0, P1) for a binary-input channel with rows P0 and P2.
pub fn general_channel_ratio(w: &Channel, theta: f64) -> Result<f64> {
    if w.input_size() != 2 {
        return Err(SdhtError::Dimension { expected: 2, got: w.input_size() });
    }
    check_theta(theta)?;
    if w.has_equal_rows() {
        return Err(SdhtError::ExcludedChannel("W(·|0) = W(·|1)".into()));
    }
    let p0 = w.row_distribution(0);
    let p2 = w.row_distribution(1);
    let mid: Vec<f64> = p0.probs().iter().zip(p2.probs()).map(|(x, y)| (1.0 - theta) * x + theta * y).collect();
    let p1 = FiniteDistribution::new(mid)?;
    Ok(hellinger_sq(&p1, &p2)? / hellinger_sq(&p0, &p1)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionStep {
    /// Merged a pair with equal likelihood ratios (or a symbol unused by both rows).
    Merge,
    /// Raised the lowest ratio to the next one, then merged.
    LowGamma,
    /// Removed shared mass from the second-highest symbol up to the top ratio, then merged.
    HighInverseGamma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceDirection {
    Constant,
    NonDecreasing,
    NonIncreasing,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub channel: Channel,
    /// Ratio before the first step and after every step.
    pub trace: Vec<f64>,
    pub steps: Vec<ReductionStep>,
    pub direction: TraceDirection,
}

const TRACE_SLACK: f64 = 1e-9;

fn slack(v: f64) -> f64 {
    TRACE_SLACK * v.abs().max(1.0)
}

pub fn trace_direction(trace: &[f64]) -> TraceDirection {
    let up = trace.windows(2).any(|w| w[1] > w[0] + slack(w[0]));
    let down = trace.windows(2).any(|w| w[1] < w[0] - slack(w[0]));
    match (up, down) {
        (false, false) => TraceDirection::Constant,
        (true, false) => TraceDirection::NonDecreasing,
        (false, true) => TraceDirection::NonIncreasing,
        (true, true) => TraceDirection::Mixed,
    }
}

fn col(w: &Channel, y: usize) -> (f64, f64) {
    (w.entry(0, y), w.entry(1, y))
}

/// A pure merge if one is available: a symbol with zero mass in both rows,
/// or two symbols with equal likelihood ratios.
fn find_merge(w: &Channel) -> Option<(usize, usize)> {
    let m = w.output_size();
    if let Some(z) = (0..m).find(|&y| col(w, y) == (0.0, 0.0)) {
        let other = if z == 0 { 1 } else { 0 };
        return Some((other.min(z), other.max(z)));
    }
    for i in 0..m {
        for j in i + 1..m {
            if cmp_ratio(col(w, i), col(w, j)).is_eq() {
                return Some((i, j));
            }
        }
    }
    None
}

/// Collapses a binary-input channel to two outputs without lowering the ratio.
///
/// Each step either merges equal-ratio symbols (ratio unchanged), or first
/// makes two adjacent symbols equal-ratio: on the low side by moving mass
/// onto the lowest-ratio symbol, otherwise by stripping shared mass from the
/// second-highest symbol.
pub fn reduce_to_binary(w: &Channel, theta: f64) -> Result<Reduction> {
    let mut cur = w.clone();
    let mut trace = vec![general_channel_ratio(&cur, theta)?];
    let mut steps = Vec::new();
    while cur.output_size() > 2 {
        if let Some((i, j)) = find_merge(&cur) {
            cur = merge_symbols(&cur, i, j)?;
            steps.push(ReductionStep::Merge);
        } else {
            let s = sort_by_likelihood_ratio(&cur)?;
            let m = s.output_size();
            let (b0, b1) = col(&s, 1);
            if b0 < b1 {
                let (a0, a1) = col(&s, 0);
                let g = gamma_star(a0, a1, b0, b1)?;
                cur = merge_symbols(&gamma_transform(&s, g)?, 0, 1)?;
                steps.push(ReductionStep::LowGamma);
            } else {
                let (j, k) = (m - 2, m - 1);
                let (a0, a1) = col(&s, j);
                let (t0, t1) = col(&s, k);
                let x = if t1 == 0.0 {
                    a1
                } else {
                    let r = t0 / t1;
                    (a0 - r * a1) / (1.0 - r)
                };
                cur = merge_symbols(&inverse_gamma_transform(&s, j, x.clamp(0.0, a0.min(a1)))?, j, k)?;
                steps.push(ReductionStep::HighInverseGamma);
            }
        }
        if cur.has_equal_rows() {
            return Err(SdhtError::ExcludedChannel("reduction produced identical rows".into()));
        }
        trace.push(general_channel_ratio(&cur, theta)?);
    }
    let direction = trace_direction(&trace);
    if direction == TraceDirection::Mixed {
        return Err(SdhtError::BoundViolated(format!("ratio trace is not monotone: {trace:?}")));
    }
    let (first, last) = (trace[0], *trace.last().expect("trace is non-empty"));
    if last < first - slack(first) {
        return Err(SdhtError::BoundViolated(format!("final ratio {last} below initial {first}")));
    }
    Ok(Reduction { channel: cur, trace, steps, direction })
}

/// (√3/2 − 1)·λ, the (negative) exponent in the trade-off bound.
pub fn tradeoff_exponent(lambda: f64) -> f64 {
    (3f64.sqrt() / 2.0 - 1.0) * lambda
}

/// 1 − e^{(√3/2−1)λ}.
pub fn tradeoff_bound(lambda: f64) -> f64 {
    -tradeoff_exponent(lambda).exp_m1()
}

/// 1 − e^{−(√3/2−1)λ}, the sign as printed in the proposition; always negative.
pub fn tradeoff_bound_as_printed(lambda: f64) -> f64 {
    -(-tradeoff_exponent(lambda)).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Disjunct {
    /// TV(P1, P2) ≤ 1/2.
    CloseToAlternative,
    /// TV(P0, P1) ≥ bound.
    FarFromNull,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffAudit {
    pub theta: f64,
    pub n: usize,
    pub lambda: f64,
    pub bound: f64,
    /// The bound with the exponent sign as printed, kept for reports.
    pub bound_as_printed: f64,
    pub tv_01: f64,
    pub tv_12: f64,
    /// First disjunct that holds, if any.
    pub held: Option<Disjunct>,
}

impl TradeoffAudit {
    pub fn holds(&self) -> bool {
        self.held.is_some()
    }
}

/// Checks the trade-off disjunction for three message laws, with λ set to
/// the infimum 1/ratio_limit(θ).
pub fn tradeoff_audit(
    l0: &ExchangeableLaw,
    l1: &ExchangeableLaw,
    l2: &ExchangeableLaw,
    theta: f64,
) -> Result<TradeoffAudit> {
    let lambda = 1.0 / ratio_limit(theta)?;
    tradeoff_audit_with_lambda(l0, l1, l2, theta, lambda)
}

pub fn tradeoff_audit_with_lambda(
    l0: &ExchangeableLaw,
    l1: &ExchangeableLaw,
    l2: &ExchangeableLaw,
    theta: f64,
    lambda: f64,
) -> Result<TradeoffAudit> {
    if l0.n() != l1.n() || l1.n() != l2.n() {
        return Err(SdhtError::Dimension { expected: l0.n(), got: if l0.n() != l1.n() { l1.n() } else { l2.n() } });
    }
    let tv_01 = law_tv(l0, l1)?;
    let tv_12 = law_tv(l1, l2)?;
    let bound = tradeoff_bound(lambda);
    let held = if tv_12 <= 0.5 {
        Some(Disjunct::CloseToAlternative)
    } else if tv_01 >= bound {
        Some(Disjunct::FarFromNull)
    } else {
        None
    };
    Ok(TradeoffAudit {
        theta,
        n: l0.n(),
        lambda,
        bound,
        bound_as_printed: tradeoff_bound_as_printed(lambda),
        tv_01,
        tv_12,
        held,
    })
}

/// Audit of the keyless scheme where every client sends one output of `w`.
pub fn tradeoff_audit_channel(w: &Channel, theta: f64, n: usize) -> Result<TradeoffAudit> {
    general_channel_ratio(w, theta)?;
    let p0 = w.row_distribution(0);
    let p2 = w.row_distribution(1);
    let mid: Vec<f64> = p0.probs().iter().zip(p2.probs()).map(|(x, y)| (1.0 - theta) * x + theta * y).collect();
    let p1 = FiniteDistribution::new(mid)?;
    tradeoff_audit(&iid_law(&p0, n)?, &iid_law(&p1, n)?, &iid_law(&p2, n)?, theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn f(theta: f64, a: f64, c: f64) -> f64 {
        hellinger_ratio_f(&RatioInstance::new(theta, a, c).unwrap()).value
    }

    #[test]
    fn ratio_examples() {
        assert!((f(0.5, 0.25, 0.5) - 1.0).abs() < 1e-12);
        let r = hellinger_ratio_f(&RatioInstance::new(1.0, 0.3, 0.4).unwrap());
        assert_eq!(r, RatioValue { value: 0.0, degenerate: true });
        assert!((f(0.5, 0.0, 1e-12) - (3.0 + 2.0 * SQRT2)).abs() < 1e-6);
    }

    #[test]
    fn boundary_examples() {
        let v = boundary_ratio(0.5, 0.5).unwrap();
        assert!(v.is_finite() && v <= boundary_bound(0.5));
        assert!((boundary_bound(0.5) - 2.171_572_875).abs() < 1e-8);
        let near = boundary_ratio(0.5, 1e-10).unwrap();
        assert!((near - boundary_ratio_limit(0.5)).abs() < 1e-6);
        assert!((boundary_bound(1.0 - 1e-12) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn closed_form_matches() {
        for &c in &[0.01, 0.2, 0.5, 0.9, 0.999] {
            for &theta in &[0.25, 0.5, 0.75] {
                let direct = f(theta, 0.0, c);
                let closed = f0c_closed_form(c, theta).unwrap();
                assert!((direct - closed).abs() < 1e-10 * direct.max(1.0), "c={c} θ={theta}");
            }
        }
        let k: f64 = 2.0;
        assert!((f0c_closed_form(1e-12, 0.5).unwrap() - 1.0 / (k.sqrt() - 1.0).powi(2)).abs() < 1e-6);
        assert!((f0c_closed_form(1.0 - 1e-12, 0.5).unwrap() - f(0.5, 0.0, 1.0)).abs() < 1e-5);
        assert!(f0c_closed_form(0.0, 0.5).is_err());
    }

    #[test]
    fn limit_examples() {
        assert!((ratio_limit(0.5).unwrap() - 5.828_427_124_746_19).abs() < 1e-12);
        assert!(ratio_limit(0.9).unwrap() < ratio_limit(0.5).unwrap());
        assert!(matches!(ratio_limit(0.0), Err(SdhtError::DegenerateClass(_))));
        assert!(ratio_limit(1.0).is_err());
    }

    #[test]
    fn lemma1_examples() {
        let r = lemma1_identity_check(0.25, 0.75).unwrap();
        assert!(r.lhs.unwrap().abs() < 1e-15 && r.rhs.abs() < 1e-15);
        assert!(lemma1_identity_check(0.1, 0.9).unwrap().gap.unwrap() <= 1e-10);
        let r = lemma1_identity_check(0.4, 0.4).unwrap();
        assert!(r.indeterminate && r.lhs.is_none());
        assert!((lemma1_lhs_literal(0.1, 0.9) - r_of(0.1, 0.9)).abs() < 1e-10);
    }

    fn r_of(p: f64, q: f64) -> f64 {
        lemma1_identity_check(p, q).unwrap().rhs
    }

    #[test]
    fn k_examples() {
        assert!((k_of_t(1.0, 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((k_of_t(1e-14, 0.5).unwrap() - 0.171_572_875).abs() < 1e-6);
        assert!((k_of_t(2.0, 0.3).unwrap() - k_of_t_literal(2.0, 0.3)).abs() < 1e-10);
        let grid: Vec<f64> = (1..=100).map(|i| k_of_t(i as f64 / 10.0, 0.5).unwrap()).collect();
        assert!(grid.windows(2).all(|w| w[1] > w[0]));
        assert!(k_of_t(0.0, 0.5).is_err());
    }

    #[test]
    fn sup_examples() {
        let s = sup_ratio_binary(0.5, 400).unwrap();
        assert!(s.max_value >= 5.5 && s.max_value <= 3.0 + 2.0 * SQRT2 + 1e-9, "{s:?}");
        assert!(s.argmax.a < 1e-3 && s.argmax.c < 1e-3);
        let s = sup_ratio_binary(0.25, 200).unwrap();
        assert!(s.max_value <= 1.0 / ((4.0f64 / 3.0).sqrt() - 1.0).powi(2) + 1e-9);
        assert!((lambda_inf(0.5, 200).unwrap() - (3.0 - 2.0 * SQRT2)).abs() < 0.05);
        assert!(sup_ratio_binary(0.5, 50).is_err());
    }

    #[test]
    fn channel_ratio_matches_instance() {
        let w = Channel::new(vec![vec![0.3, 0.7], vec![0.8, 0.2]]).unwrap();
        let inst = RatioInstance::from_channel(&w, 0.4).unwrap();
        assert!((general_channel_ratio(&w, 0.4).unwrap() - hellinger_ratio_f(&inst).value).abs() < 1e-12);
        let same = Channel::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert!(matches!(general_channel_ratio(&same, 0.5), Err(SdhtError::ExcludedChannel(_))));
    }

    #[test]
    fn reduction_examples() {
        let w = Channel::new(vec![vec![0.3, 0.7], vec![0.8, 0.2]]).unwrap();
        let r = reduce_to_binary(&w, 0.5).unwrap();
        assert_eq!(r.trace.len(), 1);
        assert_eq!(r.channel, w);

        // Columns 1 and 2 share the ratio 2.
        let dup = Channel::new(vec![vec![0.1, 0.6, 0.3], vec![0.55, 0.3, 0.15]]).unwrap();
        let r = reduce_to_binary(&dup, 0.5).unwrap();
        assert_eq!(r.steps[0], ReductionStep::Merge);
        assert!((r.trace[1] - r.trace[0]).abs() < 1e-12);

        let w = Channel::new(vec![vec![0.2, 0.5, 0.3], vec![0.6, 0.1, 0.3]]).unwrap();
        let r = reduce_to_binary(&w, 0.5).unwrap();
        assert_eq!(r.channel.output_size(), 2);
        assert!(*r.trace.last().unwrap() >= r.trace[0] - 1e-9);
        assert!(*r.trace.last().unwrap() <= ratio_limit(0.5).unwrap() + 1e-9);
    }

    #[test]
    fn tradeoff_identity_channel() {
        let l = |p| iid_law(&FiniteDistribution::bernoulli(p).unwrap(), 8).unwrap();
        let a = tradeoff_audit(&l(0.0), &l(0.5), &l(1.0), 0.5).unwrap();
        let expected = 1.0 - 0.5f64.powi(8);
        assert!((a.tv_12 - expected).abs() < 1e-12 && (a.tv_01 - expected).abs() < 1e-12);
        assert!((a.lambda - (3.0 - 2.0 * SQRT2)).abs() < 1e-12);
        assert_eq!(a.held, Some(Disjunct::FarFromNull));
        assert!(a.bound > 0.0 && a.bound_as_printed < 0.0);
    }
}
