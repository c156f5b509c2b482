mod common;

use common::*;
use rand::Rng;
use sdht_core::channels::{collinearity_check, Channel};
use sdht_core::engine::*;
use sdht_core::prob::{iid_law, symmetric_event_prob, FiniteDistribution};

fn ber(p: f64) -> FiniteDistribution {
    FiniteDistribution::bernoulli(p).unwrap()
}

#[test]
fn onebit_privacy_is_exact_on_collinear_triples() {
    let mut r = rng(20);
    for i in 0..100 {
        let (mu0, mu1, mu2) = collinear_triple(&mut r, 2 + i % 4);
        for n in [8, 16, 32, 64] {
            let c = onebit_construction(&mu0, &mu1, &mu2, n).unwrap();
            assert!(matches!(c.route, OnebitRoute::Symmetrized { .. }));
            let delta = privacy_delta(&c.scheme, &[mu0.clone(), mu1.clone()]).unwrap();
            assert!(delta <= 1e-12, "triple {i}, n={n}: δ={delta}");
            assert_eq!(c.scheme.key_bits(), 1);
            assert_eq!(c.scheme.comm_bits(), n as u64);
        }
    }
}

#[test]
fn onebit_error_decays_exponentially() {
    let ns = [8usize, 16, 24, 32, 48, 64];
    let eps: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let s = build_onebit_scheme(&ber(0.3), &ber(0.7), &ber(0.5), n).unwrap();
            correctness_error(&s, &[ber(0.3), ber(0.7)], &[ber(0.5)]).unwrap()
        })
        .collect();
    let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let y: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let (slope, r2) = linear_fit(&x, &y);
    assert!(slope < 0.0 && r2 >= 0.99, "slope {slope}, R² {r2}, ε {eps:?}");
}

#[test]
fn error_never_beats_two_point_bound() {
    for n in [8, 16, 20] {
        let s = build_onebit_scheme(&ber(0.3), &ber(0.7), &ber(0.5), n).unwrap();
        let eps = correctness_error(&s, &[ber(0.3), ber(0.7)], &[ber(0.5)]).unwrap();
        let l0 = message_law(&s, &ber(0.3)).unwrap();
        let l1 = message_law(&s, &ber(0.5)).unwrap();
        assert!(eps >= epsilon_lower_bound(&l0, &l1).unwrap() - 1e-12);
    }
}

#[test]
fn separating_route_on_non_collinear_triples() {
    let mut r = rng(21);
    for i in 0..100 {
        let m = 3 + i % 3;
        let (mu0, mu1, mu2) = (random_dist(&mut r, m), random_dist(&mut r, m), random_dist(&mut r, m));
        assert!(collinearity_check(&mu0, &mu1, &mu2).unwrap().is_none());
        let h0 = [mu0.clone(), mu1.clone()];
        let h1 = [mu2.clone()];
        let eps8 = {
            let c = onebit_construction(&mu0, &mu1, &mu2, 8).unwrap();
            assert!(matches!(c.route, OnebitRoute::Separating { .. }));
            assert_eq!(c.scheme.key_bits(), 0);
            evaluate(&c.scheme, &h0, &h1).unwrap()
        };
        let eps32 = evaluate(&build_onebit_scheme(&mu0, &mu1, &mu2, 32).unwrap(), &h0, &h1).unwrap();
        assert!(eps8.delta <= 1e-12 && eps32.delta <= 1e-12);
        assert!(eps32.epsilon < eps8.epsilon, "triple {i}: {} vs {}", eps32.epsilon, eps8.epsilon);
    }
}

#[test]
fn dropping_a_constant_client_changes_nothing() {
    let (mu0, mu1, mu2) = (ber(0.2), ber(0.6), ber(0.4));
    let small = build_onebit_scheme(&mu0, &mu1, &mu2, 5).unwrap();
    let SchemeChannels::Identical(keyed) = &small.channels else { panic!("identical channels expected") };
    let silent = Channel::constant(2, 2, 0).unwrap();
    let mut per_client = vec![keyed.clone(); 5];
    per_client.insert(2, vec![silent.clone(), silent]);
    let detector = DetectorSpec::Restricted { clients: vec![0, 1, 3, 4, 5], inner: Box::new(small.detector.clone()) };
    let big = KeyedScheme::new(6, 2, SchemeChannels::PerClient(per_client), detector).unwrap();
    let h0 = [mu0, mu1];
    let h1 = [mu2];
    let a = evaluate(&small, &h0, &h1).unwrap();
    let b = evaluate(&big, &h0, &h1).unwrap();
    assert!((a.epsilon - b.epsilon).abs() <= 1e-12);
    assert!((a.delta - b.delta).abs() <= 1e-12);
}

#[test]
fn monte_carlo_agrees_with_exact() {
    let cases = [
        (build_onebit_scheme(&ber(0.3), &ber(0.7), &ber(0.5), 16).unwrap(), vec![ber(0.3), ber(0.7)], vec![ber(0.5)]),
        (
            KeyedScheme::keyless(9, Channel::identity(2).unwrap(), DetectorSpec::Majority).unwrap(),
            vec![ber(0.3)],
            vec![ber(0.6)],
        ),
    ];
    for (scheme, h0, h1) in cases {
        let exact = evaluate(&scheme, &h0, &h1).unwrap();
        let mc = monte_carlo_evaluate(&scheme, &h0, &h1, 40_000, 9).unwrap();
        let se = mc.epsilon_stderr.unwrap();
        assert!((mc.epsilon - exact.epsilon).abs() <= 4.0 * se, "{} vs {} (se {se})", mc.epsilon, exact.epsilon);
        assert!(!mc.warnings.is_empty());
    }
}

#[test]
fn det_prime_preserves_resample_law() {
    let n = 9;
    let q0 = 0.35;
    let det = DetectorSpec::Majority;
    let exact =
        symmetric_event_prob(&iid_law(&ber(q0), n).unwrap(), |h| det.decide_histogram(h).unwrap() == 1).unwrap();
    let trials = 100_000u64;
    let mut ones = 0u64;
    for t in 0..trials {
        let mut rg = sdht_core::rng::stream_rng(77, t);
        let msgs: Vec<usize> = (0..n).map(|_| usize::from(rg.gen::<f64>() < q0)).collect();
        ones += u64::from(det_prime(&det, &ber(q0), 0.4, &msgs, t).unwrap());
    }
    let freq = ones as f64 / trials as f64;
    let se = (exact * (1.0 - exact) / trials as f64).sqrt();
    assert!((freq - exact).abs() <= 4.0 * se, "{freq} vs {exact}");
}

#[test]
fn det_prime_mixes_marginals() {
    let (q0, q1, theta) = (0.2, 0.9, 0.3);
    let trials = 20_000u64;
    let n = 5;
    let mut ones = 0usize;
    for t in 0..trials {
        let mut rg = sdht_core::rng::stream_rng(78, t);
        let msgs: Vec<usize> = (0..n).map(|_| usize::from(rg.gen::<f64>() < q1)).collect();
        ones += resampled_messages(&ber(q0), theta, &msgs, t).unwrap().iter().sum::<usize>();
    }
    let total = (trials * n as u64) as f64;
    let target = theta * q1 + (1.0 - theta) * q0;
    let freq = ones as f64 / total;
    assert!((freq - target).abs() <= 4.0 * (target * (1.0 - target) / total).sqrt());

    let msgs = vec![1, 0, 1, 1, 0, 0, 1];
    assert_eq!(resampled_messages(&ber(0.5), 1.0 - 1e-9, &msgs, 3).unwrap(), msgs);
}

#[test]
fn histogram_set_detector_is_optimal_for_small_n() {
    use sdht_core::prob::{histogram_prob, histograms};
    let mut r = rng(22);
    for i in 0..60 {
        let n = 1 + i % 8;
        let (a, b) = (random_dist(&mut r, 2), random_dist(&mut r, 2));
        let (l0, l1) = (iid_law(&a, n).unwrap(), iid_law(&b, n).unwrap());
        let cells: Vec<(f64, f64)> = histograms(n, 2)
            .iter()
            .map(|h| (histogram_prob(&l0, h).unwrap(), histogram_prob(&l1, h).unwrap()))
            .collect();
        let brute = (0u32..1 << cells.len())
            .map(|mask| {
                let (mut e0, mut e1) = (0.0, 0.0);
                for (k, (p0, p1)) in cells.iter().enumerate() {
                    if mask >> k & 1 == 1 {
                        e0 += p0;
                    } else {
                        e1 += p1;
                    }
                }
                f64::max(e0, e1)
            })
            .fold(1.0, f64::min);
        let det = minimax_histogram_detector(&l0, &l1).unwrap();
        let threshold = minimax_lr_detector(&l0, &l1).unwrap();
        let scheme = |d: DetectorSpec| KeyedScheme::keyless(n, Channel::identity(2).unwrap(), d).unwrap();
        let eps = correctness_error(&scheme(det), std::slice::from_ref(&a), std::slice::from_ref(&b)).unwrap();
        let eps_threshold =
            correctness_error(&scheme(threshold), std::slice::from_ref(&a), std::slice::from_ref(&b)).unwrap();
        assert!((eps - brute).abs() <= 1e-12, "case {i}: {eps} vs brute {brute}");
        assert!(eps <= eps_threshold + 1e-12);
    }
}

#[test]
fn accept_set_detector_round_trips() {
    let d = DetectorSpec::AcceptSet { n: 3, alphabet_size: 2, accept: vec![vec![0, 3], vec![1, 2]] };
    let s = serde_json::to_string(&d).unwrap();
    assert!(s.contains("\"name\":\"accept_set\""));
    assert_eq!(serde_json::from_str::<DetectorSpec>(&s).unwrap(), d);
    assert_eq!(d.decide_sequence(&[0, 1, 1], 2).unwrap(), 1);
    assert_eq!(d.decide_sequence(&[0, 0, 0], 2).unwrap(), 0);
    assert!(d.decide_sequence(&[1, 0], 2).is_err());
}
