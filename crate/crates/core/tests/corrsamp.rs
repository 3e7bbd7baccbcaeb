use parrep::corrsamp::{
    self, classical_corr_sample, corr_sample_weights, embezzlement, qcs_execute, qcs_isometry, recommended_max_draws,
    round_to_grid, SharedRandomStream, DEFAULT_ALPHA,
};
use parrep::matcore::{self, random, PureState};
use parrep::prob::{FiniteDistribution, Variable};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

const P: [f64; 4] = [0.25, 0.25, 0.25, 0.25];
const Q: [f64; 4] = [0.35, 0.15, 0.25, 0.25];

fn harmonic(n: usize) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

#[test]
fn identical_inputs_always_agree() {
    let max = recommended_max_draws(&P, &P);
    for t in 0..20_000 {
        let r = corr_sample_weights(&P, &P, &mut SharedRandomStream::new(3, t, 4), max).unwrap();
        assert!(r.agreed && r.p_out == r.q_out && !r.failed());
    }
}

#[test]
fn close_inputs_rarely_disagree_and_keep_marginals() {
    let runs = 20_000;
    let max = recommended_max_draws(&P, &Q);
    let mut disagree = 0;
    let mut counts = [[0usize; 4]; 2];
    for t in 0..runs {
        let r = corr_sample_weights(&P, &Q, &mut SharedRandomStream::new(9, t, 4), max).unwrap();
        assert!(!r.failed());
        disagree += usize::from(!r.agreed);
        counts[0][r.p_out.unwrap()] += 1;
        counts[1][r.q_out.unwrap()] += 1;
    }
    let rate = disagree as f64 / runs as f64;
    assert!(rate <= 4.0 * 0.1 + 0.02, "{rate}");
    // Pearson goodness of fit for each player's output against its own distribution.
    let chi = ChiSquared::new(3.0).unwrap();
    for (c, target) in counts.iter().zip([P, Q]) {
        let stat: f64 = c.iter().zip(&target).map(|(&o, &p)| (o as f64 - p * runs as f64).powi(2) / (p * runs as f64)).sum();
        assert!(1.0 - chi.cdf(stat) > 1e-4, "chi-square {stat}");
    }
}

#[test]
fn streams_are_deterministic() {
    let mut a = SharedRandomStream::new(1, 5, 7);
    let mut b = SharedRandomStream::new(1, 5, 7);
    let mut c = SharedRandomStream::new(1, 6, 7);
    let xs: Vec<_> = (0..50).map(|_| a.next_pair()).collect();
    let ys: Vec<_> = (0..50).map(|_| b.next_pair()).collect();
    let zs: Vec<_> = (0..50).map(|_| c.next_pair()).collect();
    assert_eq!(xs, ys);
    assert_ne!(xs, zs);
    assert!(xs.iter().all(|&(u, p)| u < 7 && p > 0.0 && p <= 1.0));
}

#[test]
fn mismatched_universes_rejected() {
    let p = FiniteDistribution::new(vec![Variable::new("U", 2)], vec![0.5, 0.5]).unwrap();
    let q = FiniteDistribution::new(vec![Variable::new("U", 3)], vec![0.5, 0.25, 0.25]).unwrap();
    assert!(classical_corr_sample(&p, &q, &mut SharedRandomStream::new(0, 0, 2), 10).is_err());
}

#[test]
fn exhausted_draws_are_reported() {
    let r = corr_sample_weights(&[1e-9, 1.0 - 1e-9], &[1e-9, 1.0 - 1e-9], &mut SharedRandomStream::new(0, 0, 2), 0).unwrap();
    assert!(r.failed() && !r.agreed);
}

#[test]
fn embezzlement_is_normalized() {
    for n in [1, 2, 17, 1000] {
        let e = embezzlement(n).unwrap();
        let s: f64 = e.coefficients().iter().map(|c| c * c).sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(e.coefficients().windows(2).all(|w| w[0] > w[1]));
    }
    assert!(embezzlement(0).is_err());
}

#[test]
fn product_target_has_closed_form_error() {
    // For |00⟩ the aligned overlap is Σ_{j≤d'} 1/(j·√(H_{dd'} H_{d'})) = √(H_{d'} / H_{dd'}).
    let d = 2;
    for dp in [4usize, 64, 1024] {
        let psi = PureState::basis(d * d, 0);
        let iso = qcs_isometry(&psi, dp, DEFAULT_ALPHA).unwrap();
        let out = qcs_execute(&iso, &iso, d).unwrap();
        let expect = (2.0 - 2.0 * (harmonic(dp) / harmonic(d * dp)).sqrt()).sqrt();
        assert!((out.err - expect).abs() < 1e-9, "d'={dp}: {} vs {expect}", out.err);
        // The first d' embezzlement levels land on |00⟩; the rest spill onto other target vectors.
        let on_target = out.produced_target.as_matrix()[(0, 0)].re;
        assert!((on_target - harmonic(dp) / harmonic(d * dp)).abs() < 1e-9);
    }
}

#[test]
fn seeded_state_error_decreases() {
    let psi = random::pure_state(16, &mut ChaCha8Rng::seed_from_u64(3));
    let mut last = f64::INFINITY;
    for k in [8, 12, 16] {
        let iso = qcs_isometry(&psi, 1 << k, DEFAULT_ALPHA).unwrap();
        assert_eq!(iso, qcs_isometry(&psi, 1 << k, DEFAULT_ALPHA).unwrap());
        let out = qcs_execute(&iso, &iso, 4).unwrap();
        assert!(out.err < last);
        last = out.err;
    }
}

#[test]
fn invalid_parameters() {
    let psi = PureState::basis(4, 0);
    assert!(qcs_isometry(&PureState::basis(3, 0), 4, 0.1).is_err());
    assert!(qcs_isometry(&psi, 0, 0.1).is_err());
    assert!(qcs_isometry(&psi, 4, 0.0).is_err());
    assert!(qcs_isometry(&psi, corrsamp::MAX_EMBEZZLE_DIM, 0.1).is_err());
    let a = qcs_isometry(&psi, 4, 0.1).unwrap();
    let b = qcs_isometry(&psi, 8, 0.1).unwrap();
    assert!(qcs_execute(&a, &b, 2).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn grid_rounding_stays_within_half_step(raw in prop::collection::vec(0.01f64..1.0, 1..8), alpha in 0.001f64..0.5) {
        let s: f64 = raw.iter().sum();
        let nu: Vec<f64> = raw.iter().map(|x| x / s).collect();
        let r = round_to_grid(&nu, alpha);
        prop_assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // Before renormalization each ratio is within (1+α)^{±1/2}; renormalizing adds at most that again.
        let bound = 1.0 + alpha;
        for (a, b) in r.iter().zip(&nu) {
            prop_assert!(a / b <= bound * (1.0 + 1e-12) && b / a <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn produced_target_is_valid_density(seed in any::<u64>(), d in 1usize..4, k in 2u32..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random::pure_state(d * d, &mut rng);
        let b = random::pure_state(d * d, &mut rng);
        let ia = qcs_isometry(&a, 1 << k, DEFAULT_ALPHA).unwrap();
        let ib = qcs_isometry(&b, 1 << k, DEFAULT_ALPHA).unwrap();
        for out in [qcs_execute(&ia, &ia, d).unwrap(), qcs_execute(&ia, &ib, d).unwrap()] {
            let m = out.produced_target.as_matrix();
            prop_assert!(matcore::hermitian_deviation(m) <= 1e-8);
            prop_assert!((m.trace().re - 1.0).abs() <= 1e-8);
            prop_assert!(matcore::min_eigenvalue(m).unwrap() >= -1e-8);
            prop_assert!((0.0..=2.0).contains(&out.err));
        }
    }

    #[test]
    fn disagreement_tracks_distance(seed in any::<u64>(), shift in 0.0f64..0.2) {
        let q = [0.25 + shift, 0.25 - shift, 0.25, 0.25];
        let max = recommended_max_draws(&P, &q);
        let runs = 2000;
        let mut dis = 0;
        for t in 0..runs {
            let r = corr_sample_weights(&P, &q, &mut SharedRandomStream::new(seed, t, 4), max).unwrap();
            dis += usize::from(!r.agreed);
        }
        // Binomial slack of about five standard deviations at p = 1/2.
        prop_assert!((dis as f64 / runs as f64) <= 2.0 * shift / (1.0 + shift) + 0.06);
    }
}
