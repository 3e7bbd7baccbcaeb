use std::f64::consts::PI;

use parrep::games::{self, fixtures::chsh};
use parrep::reduction::{
    main_bound_compare, report_csv, run_reduction, ClassicalMode, QuantumMode, ReductionConfig, ReductionError,
};
use parrep::strategy::{born_joint, fixtures};

fn cfg(strategy: &str, n: usize, c: Option<Vec<usize>>) -> ReductionConfig {
    ReductionConfig { strategy: strategy.into(), n, c, ..Default::default() }
}

fn conditional_win(strategy: &str, n: usize, c: &[usize], i: usize) -> f64 {
    let g = chsh();
    let s = fixtures::by_name(strategy, &g, n).unwrap().unwrap();
    let born = born_joint(&g, n, &s).unwrap();
    let wc = games::win_set(&g, n, c).unwrap();
    let mut both = c.to_vec();
    both.push(i);
    let wi = games::win_set(&g, n, &both).unwrap();
    born.prob(&wi).unwrap() / born.prob(&wc).unwrap()
}

#[test]
fn exact_mode_reproduces_conditionals() {
    for name in ["tsirelson", "printing", "detprod"] {
        for c in [None, Some(vec![1])] {
            let r = run_reduction(&cfg(name, 2, c.clone())).unwrap();
            assert!(r.exact);
            assert!(r.avg_residual <= 1e-8, "{name} {c:?}: {}", r.avg_residual);
            assert!(r.within_budget);
            let c0: Vec<usize> = r.c.iter().map(|k| k - 1).collect();
            for row in &r.per_coordinate {
                let expect = conditional_win(name, 2, &c0, row.coordinate - 1);
                assert!((row.p_target - expect).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn product_targets_are_analytic() {
    let r = run_reduction(&cfg("tsirelson", 3, Some(vec![2]))).unwrap();
    assert_eq!(r.c, vec![3]);
    assert!((r.avg_p_target - (PI / 8.0).cos().powi(2)).abs() < 1e-12);
    let r = run_reduction(&cfg("detprod", 3, Some(vec![0]))).unwrap();
    assert!((r.avg_p_target - 0.75).abs() < 1e-12);
}

#[test]
fn holenstein_mode_on_product_fixture() {
    for name in ["tsirelson", "detprod"] {
        let c = ReductionConfig { mode_classical: ClassicalMode::Holenstein, trials: 20_000, seed: 4, ..cfg(name, 2, Some(vec![1])) };
        let r = run_reduction(&c).unwrap();
        assert!(!r.exact);
        assert!(r.budget.skew_tv <= 1e-12);
        assert!(r.avg_residual <= r.budget.total + 1e-8, "{name}: {} > {}", r.avg_residual, r.budget.total);
        assert!(r.avg_residual <= 0.02);
    }
}

#[test]
fn runs_are_deterministic() {
    let c = ReductionConfig { mode_classical: ClassicalMode::Holenstein, trials: 2_000, seed: 11, ..cfg("printing", 2, Some(vec![1])) };
    let a = serde_json::to_string(&run_reduction(&c).unwrap()).unwrap();
    let b = serde_json::to_string(&run_reduction(&c).unwrap()).unwrap();
    assert_eq!(a, b);
    let other = serde_json::to_string(&run_reduction(&ReductionConfig { seed: 12, ..c }).unwrap()).unwrap();
    assert_ne!(a, other);
}

#[test]
fn embezzle_mode_within_budget() {
    let c = ReductionConfig {
        mode_quantum: QuantumMode::Embezzle { d_prime: 1 << 6, alpha: 0.01 },
        ..cfg("tsirelson", 2, Some(vec![1]))
    };
    let r = run_reduction(&c).unwrap();
    let q = r.qcs.as_ref().unwrap();
    assert!(q.avg_err > 0.0 && q.max_err <= 2.0);
    assert!(r.avg_residual <= r.budget.total + 1e-8);
    let cmp = main_bound_compare(&r, 0.1);
    assert!(cmp.pass_threshold);
}

#[test]
fn config_errors() {
    assert!(matches!(run_reduction(&cfg("tsirelson", 0, None)), Err(ReductionError::Config(_))));
    assert!(run_reduction(&cfg("tsirelson", 2, Some(vec![5]))).is_err());
    assert!(run_reduction(&cfg("tsirelson", 2, Some(vec![0, 1]))).is_err());
    assert!(run_reduction(&cfg("no-such-fixture", 2, None)).is_err());
    let bad: Result<ReductionConfig, _> = serde_json::from_str(r#"{"mode_classical": "sometimes"}"#);
    assert!(bad.is_err());
}

#[test]
fn csv_has_one_row_per_free_coordinate() {
    let r = run_reduction(&cfg("printing", 3, Some(vec![2]))).unwrap();
    let text = report_csv(&r).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "coordinate,p_tilde,p_target,residual,stderr,trials");
    assert_eq!(lines.count(), 2);
}
