//! Randomized checks of matrix inequalities used by the sampling analysis.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    fidelity, hermitian_trace_norm, local_expectation, mat_sqrt, random, symmetric_purification, trace_distance,
    trace_norm, transpose_in_basis, MatError,
};

/// Aggregate of one property over a seeded sweep.
#[derive(Debug, Clone, Serialize)]
pub struct FactSummary {
    pub name: String,
    pub trials: usize,
    pub violations: usize,
    /// Smallest value of `rhs + slack − lhs` observed; negative means a violation.
    pub worst_margin: f64,
}

impl FactSummary {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Sweep a trial function over `trials` seeds derived from `seed`.
/// The trial returns `(lhs, rhs)` for an inequality `lhs ≤ rhs + slack`.
pub fn sweep<F, E>(name: &str, trials: usize, seed: u64, slack: f64, trial: F) -> Result<FactSummary, E>
where
    F: Fn(&mut ChaCha8Rng) -> Result<(f64, f64), E> + Sync,
    E: Send,
{
    use rayon::prelude::*;
    let margins: Result<Vec<f64>, E> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64 + 1);
            let (lhs, rhs) = trial(&mut rng)?;
            Ok(rhs + slack - lhs)
        })
        .collect();
    let margins = margins?;
    Ok(FactSummary {
        name: name.to_string(),
        trials,
        violations: margins.iter().filter(|m| !(**m >= 0.0)).count(),
        worst_margin: margins.iter().cloned().fold(f64::INFINITY, f64::min),
    })
}

fn dim<R: Rng>(rng: &mut R) -> usize {
    rng.gen_range(1..=8)
}

/// `|⟨ψ|X⊗Y|ψ⟩ − Tr(X√ρYᵀ√ρ)|` against zero.
pub fn ando_trial<R: Rng>(rng: &mut R) -> Result<(f64, f64), MatError> {
    let d = dim(rng);
    let rho = random::density(d, rng.gen_range(1..=d), rng);
    let (psi, basis) = symmetric_purification(&rho)?;
    let x = random::ginibre(d, d, rng);
    let y = random::ginibre(d, d, rng);
    let lhs = local_expectation(&x, &y, psi.as_vector())?;
    let s = mat_sqrt(rho.as_matrix())?;
    let rhs = (&x * &s * transpose_in_basis(&y, &basis) * &s).trace();
    Ok(((lhs - rhs).norm(), 0.0))
}

/// `‖A−B‖_F² ≤ ‖A²−B²‖₁` for PSD A, B.
pub fn powers_stormer_trial<R: Rng>(rng: &mut R) -> Result<(f64, f64), MatError> {
    let d = dim(rng);
    let a = random::psd(d, rng.gen_range(1..=d), rng);
    let b = random::psd(d, rng.gen_range(1..=d), rng);
    let diff = &a - &b;
    let lhs = diff.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let rhs = hermitian_trace_norm(&(&a * &a - &b * &b))?;
    Ok((lhs, rhs))
}

/// `‖vv† − ww†‖₁ ≤ 2‖v − w‖` for unit vectors.
pub fn pure_trace_bound_trial<R: Rng>(rng: &mut R) -> Result<(f64, f64), MatError> {
    let d = dim(rng);
    let v = random::pure_state(d, rng);
    // Mix in nearby pairs so the bound is probed at small distances too.
    let w = if rng.gen_bool(0.5) {
        random::pure_state(d, rng)
    } else {
        let eps: f64 = rng.gen_range(1e-6..0.3);
        let noise = random::pure_state(d, rng);
        super::PureState::normalized(v.as_vector() + noise.as_vector().scale(eps))?
    };
    let lhs = trace_norm(&(v.density() - w.density()));
    let rhs = 2.0 * (v.as_vector() - w.as_vector()).norm();
    Ok((lhs, rhs))
}

/// Both sides of `1 − F ≤ TD ≤ √(1 − F²)`, reported as the tighter of the two margins.
pub fn fuchs_van_de_graaf_trial<R: Rng>(rng: &mut R) -> Result<(f64, f64), MatError> {
    let d = dim(rng);
    let rho = random::density(d, rng.gen_range(1..=d), rng);
    let sigma = random::density(d, rng.gen_range(1..=d), rng);
    let td = trace_distance(rho.as_matrix(), sigma.as_matrix())?;
    let f = fidelity(rho.as_matrix(), sigma.as_matrix())?;
    let lower = td - (1.0 - f);
    let upper = (1.0 - f * f).max(0.0).sqrt() - td;
    Ok((-lower.min(upper), 0.0))
}

pub fn run_all(trials: usize, seed: u64) -> Result<Vec<FactSummary>, MatError> {
    Ok(vec![
        sweep("ando_identity", trials, seed, 1e-9, ando_trial)?,
        sweep("powers_stormer", trials, seed ^ 0x5157, 1e-9, powers_stormer_trial)?,
        sweep("pure_state_trace_bound", trials, seed ^ 0x7ace, 1e-9, pure_trace_bound_trial)?,
        sweep("fuchs_van_de_graaf", trials, seed ^ 0xf0d6, 1e-9, fuchs_van_de_graaf_trial)?,
    ])
}
