//! Classical correlated sampling over shared randomness, and quantum correlated
//! sampling from an embezzlement state, kept entirely in Schmidt-coefficient form.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::matcore::{self, c, CMatrix, DensityMatrix, MatError, PureState};
use crate::prob::FiniteDistribution;

/// Cap on `d·d'` for an alignment isometry.
pub const MAX_EMBEZZLE_DIM: usize = 1 << 24;
pub const DEFAULT_ALPHA: f64 = 0.01;

#[derive(Debug, Error)]
pub enum CorrSampError {
    #[error("distributions live on different universes ({0} vs {1} outcomes)")]
    UniverseMismatch(usize, usize),
    #[error("invalid parameter: {0}")]
    InvalidArgument(String),
    #[error("isometries are incompatible: {0}")]
    DimensionMismatch(String),
    #[error(transparent)]
    Mat(#[from] MatError),
}

/// Deterministic stream of `(u, p)` pairs: `u` uniform over the universe, `p` uniform in `(0, 1]`.
#[derive(Debug, Clone)]
pub struct SharedRandomStream {
    universe: usize,
    rng: ChaCha8Rng,
}

impl SharedRandomStream {
    pub fn new(seed: u64, id: u64, universe: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(id);
        Self { universe, rng }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn next_pair(&mut self) -> (usize, f64) {
        let u = self.rng.gen_range(0..self.universe);
        let p = 1.0 - self.rng.gen::<f64>();
        (u, p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CorrSample {
    /// First player's output, `None` if the draws ran out.
    pub p_out: Option<usize>,
    pub q_out: Option<usize>,
    pub agreed: bool,
    pub draws: usize,
}

impl CorrSample {
    pub fn failed(&self) -> bool {
        self.p_out.is_none() || self.q_out.is_none()
    }
}

/// `⌈40 / smallest nonzero probability⌉` over both weight vectors.
pub fn recommended_max_draws(p: &[f64], q: &[f64]) -> usize {
    let lo = p.iter().chain(q).copied().filter(|&w| w > 0.0).fold(1.0, f64::min);
    (40.0 / lo).ceil().min(usize::MAX as f64 / 2.0) as usize
}

/// Each player accepts the first shared draw `(u, p)` with `p ≤ weight(u)`.
pub fn corr_sample_weights(p: &[f64], q: &[f64], stream: &mut SharedRandomStream, max_draws: usize) -> Result<CorrSample, CorrSampError> {
    if p.len() != q.len() || p.len() != stream.universe() {
        return Err(CorrSampError::UniverseMismatch(p.len(), q.len()));
    }
    let (mut pa, mut qa) = (None, None);
    let mut draws = 0;
    while draws < max_draws && (pa.is_none() || qa.is_none()) {
        let (u, r) = stream.next_pair();
        if pa.is_none() && r <= p[u] {
            pa = Some((draws, u));
        }
        if qa.is_none() && r <= q[u] {
            qa = Some((draws, u));
        }
        draws += 1;
    }
    let agreed = matches!((pa, qa), (Some((i, _)), Some((j, _))) if i == j);
    Ok(CorrSample { p_out: pa.map(|x| x.1), q_out: qa.map(|x| x.1), agreed, draws })
}

pub fn classical_corr_sample(
    p: &FiniteDistribution,
    q: &FiniteDistribution,
    stream: &mut SharedRandomStream,
    max_draws: usize,
) -> Result<CorrSample, CorrSampError> {
    if p.cards() != q.cards() {
        return Err(CorrSampError::UniverseMismatch(p.len(), q.len()));
    }
    corr_sample_weights(p.weights(), q.weights(), stream, max_draws)
}

/// `|E_N⟩ ∝ Σ_j j^{-1/2} |j⟩|j⟩` as its coefficient list (0-based index `j-1`).
#[derive(Debug, Clone, PartialEq)]
pub struct EmbezzlementVector {
    coefficients: Vec<f64>,
}

impl EmbezzlementVector {
    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }
}

fn harmonic(n: usize) -> f64 {
    // Summed from the small end to keep rounding low.
    (1..=n).rev().map(|k| 1.0 / k as f64).sum()
}

pub fn embezzlement(n: usize) -> Result<EmbezzlementVector, CorrSampError> {
    if n == 0 {
        return Err(CorrSampError::InvalidArgument("embezzlement dimension must be positive".into()));
    }
    let h = harmonic(n);
    Ok(EmbezzlementVector { coefficients: (1..=n).map(|j| 1.0 / (j as f64 * h).sqrt()).collect() })
}

/// Local map from the embezzlement register `C^{dd'}` to target ⊗ junk, built from one
/// party's description of a bipartite state.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentIsometry {
    pub d: usize,
    pub d_prime: usize,
    pub alpha: f64,
    /// `perm[j] = k·d' + l`: embezzlement index `j` goes to target basis vector `k`, junk `l`.
    pub perm: Vec<u32>,
    /// Schmidt vectors of the described state (columns), used by the first party.
    pub left: CMatrix,
    /// Used by the second party.
    pub right: CMatrix,
    /// Unrounded Schmidt coefficients, descending.
    pub schmidt: Vec<f64>,
    pub target: PureState,
}

/// Rounds each `ν_k` to the nearest point of `{(1+α)^{-t}}` in log scale, then renormalizes.
pub fn round_to_grid(nu: &[f64], alpha: f64) -> Vec<f64> {
    let step = (1.0 + alpha).ln();
    let r: Vec<f64> = nu
        .iter()
        .map(|&v| if v > 0.0 { (-(-v.ln() / step).round() * step).exp() } else { 0.0 })
        .collect();
    let s: f64 = r.iter().sum();
    r.iter().map(|v| v / s).collect()
}

pub fn qcs_isometry(own_state: &PureState, d_prime: usize, alpha: f64) -> Result<AlignmentIsometry, CorrSampError> {
    let dd = own_state.dim();
    let d = (dd as f64).sqrt().round() as usize;
    if d * d != dd {
        return Err(CorrSampError::DimensionMismatch(format!("state dimension {dd} is not a square")));
    }
    if d_prime == 0 || d.saturating_mul(d_prime) > MAX_EMBEZZLE_DIM {
        return Err(CorrSampError::InvalidArgument(format!("d·d' = {}·{d_prime} outside 1..=2^24", d)));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(CorrSampError::InvalidArgument(format!("alpha = {alpha}")));
    }
    let sd = matcore::schmidt(own_state, d, d)?;
    let nu: Vec<f64> = sd.coefficients.iter().map(|s| s * s).collect();
    let rounded = round_to_grid(&nu, alpha);
    let h = harmonic(d_prime);
    let mut order: Vec<(f64, u32)> = Vec::with_capacity(d * d_prime);
    for (k, v) in rounded.iter().enumerate() {
        for l in 0..d_prime {
            order.push(((v / ((l + 1) as f64 * h)).sqrt(), (k * d_prime + l) as u32));
        }
    }
    order.sort_unstable_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1)));
    Ok(AlignmentIsometry {
        d,
        d_prime,
        alpha,
        perm: order.into_iter().map(|(_, idx)| idx).collect(),
        left: sd.left,
        right: sd.right,
        schmidt: sd.coefficients,
        target: own_state.clone(),
    })
}

#[derive(Debug, Clone)]
pub struct QcsOutcome {
    /// State on the two target factors after the junk registers are traced out.
    pub produced_target: DensityMatrix,
    /// `‖(V ⊗ W)|E_{dd'}⟩ − |φ⟩|E_{d'}⟩‖` with `φ` the first party's target.
    pub err: f64,
}

/// Apply `iso_a` on the first half and `iso_b` on the second half of `|E_{dd'}⟩`.
pub fn qcs_execute(iso_a: &AlignmentIsometry, iso_b: &AlignmentIsometry, d: usize) -> Result<QcsOutcome, CorrSampError> {
    if iso_a.d != d || iso_b.d != d || iso_a.d_prime != iso_b.d_prime {
        return Err(CorrSampError::DimensionMismatch(format!(
            "d = {d}, isometries ({}, {}) and ({}, {})",
            iso_a.d, iso_a.d_prime, iso_b.d, iso_b.d_prime
        )));
    }
    let dp = iso_a.d_prime;
    let emb = embezzlement(d * dp)?;
    let junk = embezzlement(dp)?;
    // ⟨R^A_k | R^B_k'⟩ on the second factor.
    let gram = iso_a.right.adjoint() * &iso_b.right;
    let mut overlap = c(0.0, 0.0);
    let mut keyed: Vec<(u64, u32, u32, f64)> = Vec::with_capacity(d * dp);
    for (j, &cj) in emb.coefficients().iter().enumerate() {
        let (ia, ib) = (iso_a.perm[j] as usize, iso_b.perm[j] as usize);
        let (ka, la) = (ia / dp, ia % dp);
        let (kb, lb) = (ib / dp, ib % dp);
        if la == lb {
            overlap += gram[(ka, kb)] * (cj * junk.coefficients()[la] * iso_a.schmidt[ka]);
        }
        keyed.push((((la as u64) << 32) | lb as u64, ka as u32, kb as u32, cj));
    }
    keyed.sort_unstable_by_key(|e| (e.0, e.1, e.2));
    let mut w = CMatrix::zeros(d * d, d * d);
    let mut start = 0;
    while start < keyed.len() {
        let mut end = start;
        while end < keyed.len() && keyed[end].0 == keyed[start].0 {
            end += 1;
        }
        let group = &keyed[start..end];
        for &(_, ka, kb, ca) in group {
            let r = ka as usize * d + kb as usize;
            for &(_, ka2, kb2, cb) in group {
                let s = ka2 as usize * d + kb2 as usize;
                w[(r, s)] += c(ca * cb, 0.0);
            }
        }
        start = end;
    }
    let basis = matcore::tensor(&iso_a.left, &iso_b.right);
    let rho = &basis * w * basis.adjoint();
    let err = (2.0 - 2.0 * overlap.re).max(0.0).sqrt();
    Ok(QcsOutcome { produced_target: DensityMatrix::from_unnormalized(matcore::hermitize(&rho))?, err })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_embezzlement() {
        let e = embezzlement(2).unwrap();
        let sq: Vec<f64> = e.coefficients().iter().map(|x| x * x).collect();
        assert!((sq[0] - 2.0 / 3.0).abs() < 1e-15 && (sq[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(embezzlement(1).unwrap().coefficients(), &[1.0]);
    }

    #[test]
    fn trivial_dimension_is_exact() {
        let psi = PureState::basis(1, 0);
        let iso = qcs_isometry(&psi, 16, DEFAULT_ALPHA).unwrap();
        assert_eq!(iso.perm, (0..16u32).collect::<Vec<_>>());
        let out = qcs_execute(&iso, &iso, 1).unwrap();
        assert!(out.err < 1e-7);
    }
}

