mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use sdht_core::channels::{merge_symbols, Channel};
use sdht_core::lab::*;

const THETAS: [f64; 3] = [0.25, 0.5, 0.75];

fn f(theta: f64, a: f64, c: f64) -> f64 {
    hellinger_ratio_f(&RatioInstance::new(theta, a, c).unwrap()).value
}

#[test]
fn ratio_is_largest_at_a_zero() {
    let res = 200;
    for theta in THETAS {
        for j in 1..res {
            let c = j as f64 / res as f64;
            let edge = f(theta, 0.0, c);
            for i in 0..(res - j) {
                let a = i as f64 / res as f64;
                assert!(f(theta, a, c) <= edge + 1e-9 * edge.max(1.0), "θ={theta} a={a} c={c}");
            }
        }
    }
}

#[test]
fn ratio_at_a_zero_decreases_in_c() {
    for theta in THETAS {
        let vals: Vec<f64> = (1..1000).map(|j| f(theta, 0.0, j as f64 / 1000.0)).collect();
        assert!(vals.windows(2).all(|w| w[1] <= w[0] + 1e-9), "θ={theta}");
        let closed: Vec<f64> = (1..1000).map(|j| f0c_closed_form(j as f64 / 1000.0, theta).unwrap()).collect();
        for (x, y) in vals.iter().zip(&closed) {
            assert!((x - y).abs() <= 1e-10 * x.max(1.0));
        }
    }
}

#[test]
fn grid_supremum_is_bracketed_by_the_limit() {
    for theta in THETAS {
        let b = ratio_limit(theta).unwrap();
        let s = sup_ratio_binary(theta, 1000).unwrap();
        assert!(s.max_value <= b + 1e-9 && s.max_value >= 0.95 * b, "θ={theta}: {} vs {b}", s.max_value);
    }
}

#[test]
fn lambda_tracks_limit() {
    let thetas = [0.1, 0.25, 0.5, 0.75, 0.9];
    let lambdas: Vec<f64> = thetas.iter().map(|&t| lambda_inf(t, 150).unwrap()).collect();
    assert!(lambdas.iter().all(|&l| l > 0.0));
    assert!(lambdas.windows(2).all(|w| w[1] > w[0]));
    let limits: Vec<f64> = thetas.iter().map(|&t| ratio_limit(t).unwrap()).collect();
    assert!(limits.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn lemma1_gap_on_random_points() {
    let mut r = rng(30);
    for _ in 0..10_000 {
        let (p, q) = (r.gen_range(1e-6..1.0 - 1e-6), r.gen_range(1e-6..1.0 - 1e-6));
        let c = lemma1_identity_check(p, q).unwrap();
        assert!(c.gap.unwrap() <= 1e-10 * c.rhs.abs().max(1.0), "p={p} q={q} {c:?}");
    }
}

#[test]
fn k_is_increasing_and_continuous() {
    for theta in THETAS {
        let grid: Vec<f64> = (0..1000).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 999.0)).collect();
        let k: Vec<f64> = grid.iter().map(|&t| k_of_t(t, theta).unwrap()).collect();
        assert!(k.windows(2).all(|w| w[1] > w[0]), "θ={theta}");
        let at_one = ((1.0 - theta) / theta).powi(2);
        for t in [1.0 - 1e-7, 1.0 + 1e-7] {
            assert!((k_of_t(t, theta).unwrap() - at_one).abs() <= 1e-6);
            assert!((k_of_t_literal(t, theta) - at_one).abs() <= 1e-6);
        }
    }
}

#[test]
fn reduction_is_monotone_on_random_channels() {
    let mut r = rng(31);
    let b = ratio_limit(0.5).unwrap();
    for i in 0..1_000 {
        let w = random_channel(&mut r, 2, 3 + i % 2);
        let red = reduce_to_binary(&w, 0.5).unwrap();
        let (first, last) = (red.trace[0], *red.trace.last().unwrap());
        assert_ne!(red.direction, TraceDirection::Mixed);
        assert!(red.direction != TraceDirection::NonIncreasing);
        assert!(last >= first - 1e-9 && last <= b + 1e-9, "channel {i}: {:?}", red.trace);
        assert_eq!(red.channel.output_size(), 2);
    }
}

#[test]
fn merging_equal_ratio_symbols_keeps_channel_ratio() {
    let mut r = rng(32);
    for _ in 0..200 {
        let w = random_channel(&mut r, 2, 3);
        let t = r.gen_range(0.1..0.9);
        let rows: Vec<Vec<f64>> =
            w.rows().iter().map(|row| vec![row[0], row[1], t * row[2], (1.0 - t) * row[2]]).collect();
        let split = Channel::new(rows).unwrap();
        let before = general_channel_ratio(&split, 0.4).unwrap();
        let after = general_channel_ratio(&merge_symbols(&split, 2, 3).unwrap(), 0.4).unwrap();
        assert!((before - after).abs() <= 1e-12 * before.max(1.0));
    }
}

#[test]
fn tradeoff_disjunction_on_random_channels() {
    let mut r = rng(33);
    for i in 0..200 {
        let w = random_channel(&mut r, 2, 2);
        let n = 1 + i % 12;
        let a = tradeoff_audit_channel(&w, 0.5, n).unwrap();
        assert!(a.holds(), "channel {i} n={n}: {a:?}");
        assert!((a.lambda - (3.0 - 2.0 * 2f64.sqrt())).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn channel_ratio_matches_instance(q1 in 0.0f64..0.99, gap in 0.001f64..1.0, theta in 0.05f64..0.95) {
        let q0 = (q1 + gap * (1.0 - q1)).min(1.0);
        prop_assume!(q0 > q1);
        let w = Channel::binary_from_ones(&[q0, q1]).unwrap();
        let inst = RatioInstance::from_channel(&w, theta).unwrap();
        let direct = general_channel_ratio(&w, theta).unwrap();
        let via = hellinger_ratio_f(&inst).value;
        prop_assert!((direct - via).abs() <= 1e-9 * direct.max(1.0));
    }

    #[test]
    fn ratio_never_exceeds_limit(a in 0.0f64..1.0, c in 1e-9f64..1.0, theta in 0.05f64..0.95) {
        prop_assume!(a + c <= 1.0);
        prop_assert!(f(theta, a, c) <= ratio_limit(theta).unwrap() + 1e-9);
    }
}
