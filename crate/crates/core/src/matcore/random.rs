//! Seeded random matrices and states for property sweeps.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{c, CMatrix, CVector, DensityMatrix, PureState, C64};

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) / 2f64.sqrt()
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(d, d, rng);
    (&g + g.adjoint()).scale(0.5)
}

/// Random PSD matrix of the given rank, normalized to unit spectral scale on average.
pub fn psd<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(d, rank, rng);
    (&g * g.adjoint()).unscale(rank.max(1) as f64)
}

pub fn unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(d, d, rng).qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = q;
    for k in 0..d {
        let z = r[(k, k)];
        let p = if z.norm() > 0.0 { z / z.norm() } else { c(1.0, 0.0) };
        for i in 0..d {
            q[(i, k)] *= p;
        }
    }
    q
}

pub fn pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> PureState {
    let v = CVector::from_fn(d, |_, _| gaussian(rng));
    PureState::normalized(v).expect("gaussian vector is nonzero")
}

/// Density matrix of the given rank drawn from the induced Hilbert-Schmidt measure.
pub fn density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    DensityMatrix::from_unnormalized(psd(d, rank, rng)).expect("ginibre product is PSD with positive trace")
}

pub fn full_rank_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    density(d, d, rng)
}
