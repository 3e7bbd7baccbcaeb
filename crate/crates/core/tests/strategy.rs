use std::f64::consts::PI;

use parrep::games::fixtures::{asym3, chsh};
use parrep::matcore::{self, CMatrix};
use parrep::strategy::{self, born_joint, fixtures, symmetrize, win_probability, EntangledStrategy, PovmFamily};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// ⟨ψ|A ⊗ B|ψ⟩ through an explicit Kronecker product.
fn kron_prob(s: &EntangledStrategy, x: usize, y: usize, a: usize, b: usize) -> f64 {
    let op = matcore::tensor(s.alice.element(x, a), s.bob.element(y, b));
    let v = s.psi.as_vector();
    v.dotc(&(op * v)).re
}

#[test]
fn tsirelson_reaches_cos_squared() {
    let g = chsh();
    let target = (PI / 8.0).cos().powi(2);
    for n in 1..=3 {
        let p = win_probability(&g, n, &fixtures::tsirelson(n)).unwrap();
        assert!((p - target.powi(n as i32)).abs() < 1e-9, "n={n}: {p}");
    }
}

#[test]
fn detprod_loses_only_on_one_question_pair() {
    // Alice answers x, Bob answers 0: the pair (x, y) = (1, 0) is the only loss.
    let g = chsh();
    for n in 1..=3 {
        let p = win_probability(&g, n, &fixtures::detprod(n)).unwrap();
        assert!((p - 0.75f64.powi(n as i32)).abs() < 1e-12);
        let e = fixtures::detprod(n).to_entangled(&g).unwrap();
        assert!((win_probability(&g, n, &e).unwrap() - p).abs() < 1e-12);
    }
}

#[test]
fn answer_table_matches_kronecker() {
    for s in [fixtures::tsirelson(1), fixtures::printing(2)] {
        let nx = s.alice.questions();
        let ny = s.bob.questions();
        for x in 0..nx {
            for y in 0..ny {
                let t = s.answer_table(x, y);
                let nb = s.bob.answers();
                for (k, p) in t.iter().enumerate() {
                    assert!((p - kron_prob(&s, x, y, k / nb, k % nb)).abs() < 1e-12);
                }
                assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn born_table_is_normalized_and_agrees_with_win_probability() {
    let g = chsh();
    let s = fixtures::printing(2);
    let born = born_joint(&g, 2, &s).unwrap();
    assert!((born.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let w = parrep::games::win_set(&g, 2, &[0, 1]).unwrap();
    assert!((born.prob(&w).unwrap() - win_probability(&g, 2, &s).unwrap()).abs() < 1e-12);
}

#[test]
fn incomplete_povm_rejected() {
    let half = CMatrix::identity(2, 2).scale(0.5);
    assert!(PovmFamily::new(2, vec![vec![half.clone(), half.scale(0.5)]]).is_err());
    assert!(PovmFamily::new(2, vec![vec![half.clone(), half]]).is_ok());
}

#[test]
fn file_format_round_trips() {
    for s in [fixtures::tsirelson(2), fixtures::printing(2)] {
        let back = strategy::parse_strategy(&strategy::write_strategy(&s)).unwrap();
        assert_eq!(back.n, s.n);
        assert!((back.psi.as_vector() - s.psi.as_vector()).norm() < 1e-14);
        assert!((win_probability(&chsh(), 2, &back).unwrap() - win_probability(&chsh(), 2, &s).unwrap()).abs() < 1e-14);
    }
    assert!(strategy::parse_strategy("parrep-strategy 2\n").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn symmetrize_preserves_correlations(seed in any::<u64>(), d in 1usize..4) {
        let g = asym3();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = fixtures::random_strategy(&g, 1, d, &mut rng);
        prop_assert!(s.is_symmetric(1e-9));
        let t = symmetrize(&s).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                let (p, q) = (s.answer_table(x, y), t.answer_table(x, y));
                prop_assert!(p.iter().zip(&q).all(|(a, b)| (a - b).abs() < 1e-9));
            }
        }
    }

    #[test]
    fn random_strategies_give_valid_born_tables(seed in any::<u64>(), n in 1usize..3) {
        let g = chsh();
        let s = fixtures::random_strategy(&g, n, 2, &mut ChaCha8Rng::seed_from_u64(seed));
        let born = born_joint(&g, n, &s).unwrap();
        prop_assert!(born.weights().iter().all(|&w| w >= -1e-12));
        prop_assert!((born.weights().iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let p = win_probability(&g, n, &s).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&p));
    }
}
