use std::f64::consts::PI;

use parrep::games::{fixtures, Game};
use parrep::strategy::{fixtures::tsirelson, win_probability};
use parrep::values::{self, classical_value, repetition_bound, seesaw, LogBase, SeesawConfig};
use proptest::prelude::*;

// Exhaustive search over all pairs of deterministic answer tables for `G^n`.
fn brute_force_value(g: &Game, n: usize) -> f64 {
    let nq_a = g.x_size().pow(n as u32);
    let nq_b = g.y_size().pow(n as u32);
    let na = g.a_size().pow(n as u32);
    let nb = g.b_size().pow(n as u32);
    let digits = |mut v: usize, base: usize| {
        let mut d = vec![0; n];
        for k in (0..n).rev() {
            d[k] = v % base;
            v /= base;
        }
        d
    };
    let tables = |q: usize, a: usize| -> Vec<Vec<usize>> {
        (0..a.pow(q as u32)).map(|code| (0..q).map(|i| code / a.pow(i as u32) % a).collect()).collect()
    };
    let alice = tables(nq_a, na);
    let bob = tables(nq_b, nb);
    let mut best: f64 = 0.0;
    for fa in &alice {
        for fb in &bob {
            let mut p = 0.0;
            for qx in 0..nq_a {
                for qy in 0..nq_b {
                    let (x, y) = (digits(qx, g.x_size()), digits(qy, g.y_size()));
                    let (a, b) = (digits(fa[qx], g.a_size()), digits(fb[qy], g.b_size()));
                    let w: f64 = (0..n).map(|k| g.mu(x[k], y[k])).product();
                    if (0..n).all(|k| g.wins(x[k], y[k], a[k], b[k])) {
                        p += w;
                    }
                }
            }
            best = best.max(p);
        }
    }
    best
}

#[test]
fn chsh_classical_values() {
    let g = fixtures::chsh();
    let v1 = classical_value(&g, 1).unwrap().value;
    let v2 = classical_value(&g, 2).unwrap().value;
    assert_eq!(v1, brute_force_value(&g, 1));
    assert_eq!(v2, brute_force_value(&g, 2));
    assert_eq!(v1, 0.75);
    assert_eq!(v2, 0.625);
}

#[test]
fn classical_optimum_is_attained_by_reported_strategy() {
    for g in [fixtures::chsh(), fixtures::asym3(), fixtures::trivial()] {
        let r = classical_value(&g, 1).unwrap();
        assert!((win_probability(&g, 1, &r.strategy).unwrap() - r.value).abs() < 1e-12);
        assert!((r.value - brute_force_value(&g, 1)).abs() < 1e-12);
    }
    assert_eq!(classical_value(&fixtures::trivial(), 2).unwrap().value, 1.0);
}

#[test]
fn seesaw_on_chsh() {
    let g = fixtures::chsh();
    let tsirelson_bound = (PI / 8.0).cos().powi(2);
    let mut best: f64 = 0.0;
    for seed in 0..10 {
        let r = seesaw(&g, &SeesawConfig { d: 2, max_iters: 500, seed, ..Default::default() }).unwrap();
        assert!(r.iterations <= 500);
        assert!(r.value <= tsirelson_bound + 1e-9);
        assert!((win_probability(&g, 1, &r.strategy).unwrap() - r.value).abs() < 1e-9);
        best = best.max(r.value);
    }
    assert!(best >= 0.8535, "best seesaw value {best}");
}

#[test]
fn unentangled_seesaw_is_classical() {
    let g = fixtures::chsh();
    for seed in 0..5 {
        let r = seesaw(&g, &SeesawConfig { d: 1, seed, ..Default::default() }).unwrap();
        assert!(r.value <= 0.75 + 1e-9);
    }
}

#[test]
fn tsirelson_fixture_value() {
    let v = win_probability(&fixtures::chsh(), 1, &tsirelson(1)).unwrap();
    assert!((v - (PI / 8.0).cos().powi(2)).abs() <= 1e-9);
}

#[test]
fn bound_argument_checks() {
    assert!(repetition_bound(0.0, 2.0, 1024, 1.0, LogBase::Two).is_err());
    assert!(repetition_bound(1.5, 2.0, 1024, 1.0, LogBase::Two).is_err());
    assert!(repetition_bound(0.25, 2.0, 1, 1.0, LogBase::Two).is_err());
    assert!(repetition_bound(0.25, -1.0, 1024, 1.0, LogBase::Two).is_err());
    assert!(repetition_bound(0.25, 2.0, 1024, 0.0, LogBase::Two).is_err());
}

#[test]
fn bound_is_vacuous_on_the_default_grid() {
    for k in 10..=60 {
        let r = repetition_bound(0.25, 2.0, 1u128 << k, 1.0, LogBase::Two).unwrap();
        // ε^17 = 2^-34 makes the raw value enormous for every feasible n.
        assert!(r.vacuous && r.bound_value == 1.0);
    }
}

fn raw_formula(eps: f64, s: f64, n: f64, c: f64) -> f64 {
    c * s * n.log2() / (eps.powi(17) * n.powf(0.25))
}

proptest! {
    #[test]
    fn bound_matches_formula_and_clamps(eps in 0.01f64..=1.0, s in 0.0f64..8.0, k in 1u32..120, c in 1e-3f64..10.0) {
        let n = 1u128 << k;
        let r = repetition_bound(eps, s, n, c, LogBase::Two).unwrap();
        let raw = raw_formula(eps, s, n as f64, c);
        prop_assert!((r.raw - raw).abs() <= 1e-9 * raw.abs().max(1.0));
        prop_assert_eq!(r.bound_value, r.raw.min(1.0));
        prop_assert_eq!(r.vacuous, r.raw >= 1.0);
        prop_assert!(r.bound_value <= 1.0 && r.bound_value >= 0.0);
    }

    #[test]
    fn bound_nonincreasing_once_nonvacuous(eps in 0.5f64..=1.0, s in 0.1f64..4.0, c in 1e-4f64..1.0) {
        let grid: Vec<_> = (6..=120).map(|k| repetition_bound(eps, s, 1u128 << k, c, LogBase::Two).unwrap()).collect();
        if let Some(first) = grid.iter().position(|r| !r.vacuous) {
            for w in grid[first..].windows(2) {
                prop_assert!(w[1].bound_value <= w[0].bound_value + 1e-15);
            }
        }
    }

    #[test]
    fn natural_log_scales_by_ln2(k in 2u32..100) {
        let n = 1u128 << k;
        let a = repetition_bound(1.0, 1.0, n, 1.0, LogBase::Two).unwrap().raw;
        let b = repetition_bound(1.0, 1.0, n, 1.0, LogBase::Natural).unwrap().raw;
        prop_assert!((b - a * std::f64::consts::LN_2).abs() <= 1e-12 * a.max(1.0));
    }
}

#[test]
fn bound_rises_below_e_to_the_fourth() {
    // log n / n^{1/4} peaks at n = e^4, so a tiny constant can be nonvacuous and still grow.
    let at = |n: u128| repetition_bound(1.0, 1.0, n, 1e-3, LogBase::Two).unwrap();
    assert!(!at(4).vacuous && at(32).bound_value > at(4).bound_value);
    assert!(at(64).bound_value < at(55).bound_value);
}

#[test]
fn bell_operator_is_hermitian() {
    let s = tsirelson(1);
    let w = values::bell_operator(&fixtures::chsh(), &s.alice, &s.bob).unwrap();
    assert!(parrep::matcore::hermitian_deviation(&w) < 1e-12);
}
