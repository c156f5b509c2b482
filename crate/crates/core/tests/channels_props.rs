mod common;

use common::*;
use proptest::prelude::*;
use rand::Rng;
use sdht_core::channels::*;
use sdht_core::prob::{hellinger_sq, FiniteDistribution};

#[test]
fn push_forward_keeps_mass() {
    let mut r = rng(10);
    for i in 0..10_000 {
        let (a, b) = (2 + i % 5, 2 + (i / 5) % 5);
        let w = random_channel(&mut r, a, b);
        let out = push_forward(&w, &random_dist(&mut r, a)).unwrap();
        assert!((out.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn composition_is_sequential_push_forward() {
    let mut r = rng(11);
    for _ in 0..2_000 {
        let (a, b, c) = (r.gen_range(2..6), r.gen_range(2..6), r.gen_range(2..6));
        let inner = random_channel(&mut r, a, b);
        let outer = random_channel(&mut r, b, c);
        let mu = random_dist(&mut r, a);
        let direct = push_forward(&compose(&outer, &inner).unwrap(), &mu).unwrap();
        let staged = push_forward(&outer, &push_forward(&inner, &mu).unwrap()).unwrap();
        for (x, y) in direct.probs().iter().zip(staged.probs()) {
            assert!((x - y).abs() <= 1e-12);
        }
    }
}

#[test]
fn separating_channel_on_random_triples() {
    let mut r = rng(12);
    for i in 0..1_000 {
        let m = 3 + i % 4;
        let (mu0, mu1, mu2) = (random_dist(&mut r, m), random_dist(&mut r, m), random_dist(&mut r, m));
        assert!(collinearity_check(&mu0, &mu1, &mu2).unwrap().is_none());
        let sep = separating_channel(&mu0, &mu1, &mu2).unwrap();
        let (y0, y1, y2) = (
            push_forward(&sep.channel, &mu0).unwrap(),
            push_forward(&sep.channel, &mu1).unwrap(),
            push_forward(&sep.channel, &mu2).unwrap(),
        );
        assert!((y0.get(1) - y1.get(1)).abs() <= 1e-10);
        assert!(sep.margin > 0.0);
        assert!((y0.get(1) - y2.get(1)) >= sep.margin - 1e-12);
    }
}

#[test]
fn collinear_triples_are_detected() {
    let mut r = rng(13);
    for i in 0..500 {
        let (mu0, mu1, mu2) = collinear_triple(&mut r, 2 + i % 5);
        let w = collinearity_check(&mu0, &mu1, &mu2).unwrap().expect("collinear");
        let mus = [&mu0, &mu1, &mu2];
        for x in 0..mu0.alphabet_size() {
            let fitted = w.theta * mus[w.a].get(x) + (1.0 - w.theta) * mus[w.b].get(x);
            assert!((fitted - mus[w.c].get(x)).abs() <= 1e-10);
        }
        assert!(separating_channel(&mu0, &mu1, &mu2).is_err());
    }
}

/// Splits output `y` of `w` into two symbols with the same likelihood ratio.
fn split_column(w: &Channel, y: usize, t: f64) -> Channel {
    let rows = w
        .rows()
        .iter()
        .map(|row| {
            let mut out = row.clone();
            out[y] = t * row[y];
            out.push((1.0 - t) * row[y]);
            out
        })
        .collect();
    Channel::new(rows).unwrap()
}

fn bernoulli_outputs(w: &Channel, p: f64, q: f64) -> (FiniteDistribution, FiniteDistribution) {
    (
        push_forward(w, &FiniteDistribution::bernoulli(p).unwrap()).unwrap(),
        push_forward(w, &FiniteDistribution::bernoulli(q).unwrap()).unwrap(),
    )
}

#[test]
fn merging_equal_ratios_preserves_hellinger() {
    let mut r = rng(14);
    for _ in 0..1_000 {
        let m = r.gen_range(2..6);
        let base = random_channel(&mut r, 2, m);
        let y = r.gen_range(0..m);
        let split = split_column(&base, y, r.gen_range(0.05..0.95));
        let merged = merge_symbols(&split, y, m).unwrap();
        let (p, q) = (r.gen::<f64>(), r.gen::<f64>());
        let (a, b) = bernoulli_outputs(&split, p, q);
        let (c, d) = bernoulli_outputs(&merged, p, q);
        assert!((hellinger_sq(&a, &b).unwrap() - hellinger_sq(&c, &d).unwrap()).abs() <= 1e-12);
        assert!(merge_hellinger_delta(&split, y, m, p, q).unwrap().abs() <= 1e-12);
    }
}

#[test]
fn gamma_star_plug_in() {
    let mut r = rng(15);
    let mut checked = 0;
    while checked < 10_000 {
        let (a0, a1, b0, b1) = (r.gen::<f64>(), r.gen::<f64>(), r.gen::<f64>(), r.gen::<f64>());
        if a1 <= 0.0 || b1 <= 0.0 || b0 > b1 || a0 * b1 > b0 * a1 {
            continue;
        }
        checked += 1;
        let g = gamma_star(a0, a1, b0, b1).unwrap();
        assert!((0.0..=1.0).contains(&g));
        let lifted0 = (1.0 - g) * a0 + g;
        let lifted1 = (1.0 - g) * a1 + g;
        assert!(
            (lifted0 * b1 - b0 * lifted1).abs() <= 1e-12,
            "{a0} {a1} {b0} {b1} g={g} gap={}",
            lifted0 * b1 - b0 * lifted1
        );
    }
}

proptest! {
    #[test]
    fn sorting_orders_ratios(rows in prop::collection::vec(0.01f64..1.0, 8)) {
        let (r0, r1) = rows.split_at(4);
        let n = |v: &[f64]| { let s: f64 = v.iter().sum(); v.iter().map(|x| x / s).collect::<Vec<_>>() };
        let w = Channel::new(vec![n(r0), n(r1)]).unwrap();
        let sorted = sort_by_likelihood_ratio(&w).unwrap();
        prop_assert!(is_ratio_sorted(&sorted));
        for y in 1..4 {
            prop_assert!(sorted.entry(0, y - 1) * sorted.entry(1, y) <= sorted.entry(0, y) * sorted.entry(1, y - 1) + 1e-15);
        }
    }

    #[test]
    fn gamma_transform_keeps_rows_stochastic(rows in prop::collection::vec(0.01f64..1.0, 6), g in 0.0f64..1.0) {
        let (r0, r1) = rows.split_at(3);
        let n = |v: &[f64]| { let s: f64 = v.iter().sum(); v.iter().map(|x| x / s).collect::<Vec<_>>() };
        let w = sort_by_likelihood_ratio(&Channel::new(vec![n(r0), n(r1)]).unwrap()).unwrap();
        let t = gamma_transform(&w, g).unwrap();
        for row in t.rows() {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
