use parrep::matcore::{self, c, random, CMatrix, CVector, DensityMatrix, PureState, Subsystem};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
    a.shape() == b.shape() && (a - b).iter().all(|z| z.norm() <= tol)
}

// Direct index-sum partial traces.
fn trace_right(m: &CMatrix, da: usize, db: usize) -> CMatrix {
    CMatrix::from_fn(da, da, |i, j| (0..db).map(|k| m[(i * db + k, j * db + k)]).sum())
}

fn trace_left(m: &CMatrix, da: usize, db: usize) -> CMatrix {
    CMatrix::from_fn(db, db, |i, j| (0..da).map(|k| m[(k * db + i, k * db + j)]).sum())
}

#[test]
fn bell_state_reduces_to_maximally_mixed() {
    let s = 0.5f64.sqrt();
    let bell = PureState::new(CVector::from_vec(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)])).unwrap();
    let r = matcore::partial_trace(&bell.density(), 2, 2, Subsystem::Right).unwrap();
    assert!(close(&r, &DensityMatrix::maximally_mixed(2).into_matrix(), 1e-15));
    let sd = matcore::schmidt(&bell, 2, 2).unwrap();
    assert_eq!(sd.rank(1e-12), 2);
    assert!(sd.coefficients.iter().all(|x| (x - s).abs() < 1e-14));
}

#[test]
fn rejects_nonsquare_dims() {
    let m = CMatrix::identity(6, 6);
    assert!(matcore::partial_trace(&m, 4, 2, Subsystem::Left).is_err());
    assert!(DensityMatrix::new(CMatrix::identity(2, 2)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_trace_matches_index_sum(seed in any::<u64>(), da in 1usize..5, db in 1usize..5) {
        let m = random::ginibre(da * db, da * db, &mut rng(seed));
        let r = matcore::partial_trace(&m, da, db, Subsystem::Right).unwrap();
        let l = matcore::partial_trace(&m, da, db, Subsystem::Left).unwrap();
        prop_assert!(close(&r, &trace_right(&m, da, db), 1e-12));
        prop_assert!(close(&l, &trace_left(&m, da, db), 1e-12));
    }

    #[test]
    fn pinv_satisfies_penrose_conditions(seed in any::<u64>(), r in 1usize..6, k in 1usize..6, rank in 1usize..6) {
        let mut g = rng(seed);
        let rank = rank.min(r).min(k);
        let a = random::ginibre(r, rank, &mut g) * random::ginibre(rank, k, &mut g);
        let p = matcore::pinv(&a, 1e-12);
        prop_assert!(close(&(&a * &p * &a), &a, 1e-8));
        prop_assert!(close(&(&p * &a * &p), &p, 1e-8));
        let ap = &a * &p;
        let pa = &p * &a;
        prop_assert!(close(&ap, &ap.adjoint(), 1e-9));
        prop_assert!(close(&pa, &pa.adjoint(), 1e-9));
    }

    #[test]
    fn polar_factor_is_unitary_and_makes_psd(seed in any::<u64>(), d in 1usize..6, rank in 1usize..6) {
        let mut g = rng(seed);
        let rank = rank.min(d);
        let m = random::ginibre(d, rank, &mut g) * random::ginibre(rank, d, &mut g);
        let u = matcore::polar_psd_factor(&m).unwrap();
        prop_assert!(close(&(u.adjoint() * &u), &CMatrix::identity(d, d), 1e-9));
        let p = &u * &m;
        prop_assert!(matcore::hermitian_deviation(&p) < 1e-9);
        prop_assert!(matcore::min_eigenvalue(&matcore::hermitize(&p)).unwrap() > -1e-9);
    }

    #[test]
    fn eigh_reconstructs_descending(seed in any::<u64>(), d in 1usize..7) {
        let h = random::hermitian(d, &mut rng(seed));
        let e = matcore::eigh(&h).unwrap();
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(close(&e.reconstruct_with(|x| x), &h, 1e-9));
        let sq = matcore::mat_sqrt(&random::psd(d, d, &mut rng(seed ^ 1))).unwrap();
        prop_assert!(matcore::min_eigenvalue(&sq).unwrap() > -1e-9);
    }

    #[test]
    fn schmidt_reconstructs_state(seed in any::<u64>(), da in 1usize..5, db in 1usize..5) {
        let psi = random::pure_state(da * db, &mut rng(seed));
        let sd = matcore::schmidt(&psi, da, db).unwrap();
        let back = sd.reconstruct();
        prop_assert!((back - psi.as_vector()).norm() < 1e-10);
        prop_assert!(sd.coefficients.windows(2).all(|w| w[0] >= w[1]));
        let total: f64 = sd.coefficients.iter().map(|s| s * s).sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn apply_local_matches_kronecker(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let mut g = rng(seed);
        let a = random::ginibre(da, da, &mut g);
        let b = random::ginibre(db, db, &mut g);
        let v = random::pure_state(da * db, &mut g);
        let direct = matcore::tensor(&a, &b) * v.as_vector();
        prop_assert!((matcore::apply_local(&a, &b, v.as_vector()).unwrap() - direct).norm() < 1e-10);
    }

    #[test]
    fn pure_state_metrics_match_overlap(seed in any::<u64>(), d in 1usize..6) {
        let mut g = rng(seed);
        let psi = random::pure_state(d, &mut g);
        let phi = random::pure_state(d, &mut g);
        let ov = psi.as_vector().dotc(phi.as_vector()).norm();
        let td = matcore::trace_distance(&psi.density(), &phi.density()).unwrap();
        let f = matcore::fidelity(&psi.density(), &phi.density()).unwrap();
        prop_assert!((td - (1.0 - ov * ov).max(0.0).sqrt()).abs() < 1e-6);
        prop_assert!((f - ov).abs() < 1e-6);
    }

    #[test]
    fn purification_reduces_to_input(seed in any::<u64>(), d in 1usize..5, rank in 1usize..5) {
        let rho = random::density(d, rank.min(d), &mut rng(seed));
        let (psi, _) = matcore::symmetric_purification(&rho).unwrap();
        let red = trace_right(&psi.density(), d, d);
        prop_assert!(close(&red, rho.as_matrix(), 1e-9));
    }

    #[test]
    fn random_density_is_valid(seed in any::<u64>(), d in 1usize..6) {
        let rho = random::full_rank_density(d, &mut rng(seed));
        let m = rho.as_matrix();
        prop_assert!((m.trace().re - 1.0).abs() < 1e-10);
        prop_assert!(matcore::min_eigenvalue(m).unwrap() > 0.0);
    }
}

#[test]
fn fact_sweeps_have_no_violations() {
    for s in matcore::facts::run_all(200, 11).unwrap() {
        assert!(s.passed(), "{} violated: worst margin {}", s.name, s.worst_margin);
        assert_eq!(s.trials, 200);
    }
}
