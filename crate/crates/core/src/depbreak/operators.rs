use crate::games::{Game, Radix};
use crate::matcore::{self, apply_local, hermitize, identity, mat_sqrt, pinv, polar_psd_factor, CMatrix, PureState, PINV_TOL};
use crate::strategy::{EntangledStrategy, POVM_TOL};

use super::{DepBreakError, Player};

/// States with squared norm at or below this are treated as absent.
pub const WEIGHT_TOL: f64 = 1e-12;

/// `Σ_x Π_j q_j(x_j) Σ_{a ↦ k} E_x^a`, indexed by the answer sub-tuple `k` on `keep`
/// (digits in the order of `keep`).
pub fn coarse_povm(
    g: &Game,
    s: &EntangledStrategy,
    player: Player,
    dists: &[Vec<f64>],
    keep: &[usize],
) -> Result<Vec<CMatrix>, DepBreakError> {
    let n = s.n;
    if dists.len() != n {
        return Err(DepBreakError::BadSet(format!("{} question distributions for n = {n}", dists.len())));
    }
    let (family, qs, ans) = match player {
        Player::Alice => (&s.alice, g.alice_tuples(n), g.alice_answers(n)),
        Player::Bob => (&s.bob, g.bob_tuples(n), g.bob_answers(n)),
    };
    let kept = Radix::new(ans.base, keep.len());
    let d = s.d;
    let mut out = vec![CMatrix::zeros(d, d); kept.count()];
    let mut mass = 0.0;
    for q in 0..qs.count() {
        let w: f64 = (0..n).map(|k| dists[k][qs.digit(q, k)]).product();
        if w == 0.0 {
            continue;
        }
        mass += w;
        for a in 0..ans.count() {
            let mut k = 0;
            for &j in keep {
                k = k * ans.base + ans.digit(a, j);
            }
            out[k] += family.element(q, a).scale(w);
        }
    }
    if mass <= 0.0 {
        return Err(DepBreakError::Prob(crate::prob::ProbError::ZeroProbabilityEvent(mass)));
    }
    if (mass - 1.0).abs() > 1e-12 {
        for m in out.iter_mut() {
            *m = m.unscale(mass);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Aligned {
    pub s: CMatrix,
    pub u: CMatrix,
}

/// `S = U A^{1/2}` with `U` chosen so that `S √ρ` is PSD.
pub fn aligned_operators(a: &CMatrix, sqrt_rho: &CMatrix) -> Result<Aligned, DepBreakError> {
    let r = mat_sqrt(a)?;
    let u = polar_psd_factor(&(&r * sqrt_rho))?;
    let s = &u * r;
    Ok(Aligned { s, u })
}

/// `Â_k = (S⁺)† F_k S⁺` for each fine effect, followed by the null effect `I − Σ_k Â_k`.
pub fn fine_povm(s: &CMatrix, fine: &[CMatrix]) -> Result<Vec<CMatrix>, DepBreakError> {
    let d = s.nrows();
    let total = fine.iter().fold(CMatrix::zeros(d, d), |acc, f| acc + f);
    let gap = matcore::frobenius(&(&total - s.adjoint() * s));
    if gap > POVM_TOL {
        return Err(DepBreakError::Inconsistent(format!("fine effects differ from S†S by {gap:e}")));
    }
    let sp = pinv(s, PINV_TOL);
    let spd = sp.adjoint();
    let mut out: Vec<CMatrix> = fine.iter().map(|f| hermitize(&(&spd * f * &sp))).collect();
    let sum = out.iter().fold(CMatrix::zeros(d, d), |acc, f| acc + f);
    out.push(hermitize(&(identity(d) - sum)));
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct DepState {
    pub state: Option<PureState>,
    pub weight: f64,
}

/// Normalized `(S⊗T)ψ` and its squared norm.
pub fn dep_state(s: &CMatrix, t: &CMatrix, psi: &PureState) -> Result<DepState, DepBreakError> {
    let v = apply_local(s, t, psi.as_vector())?;
    let weight = v.norm_squared();
    let state = if weight > WEIGHT_TOL { Some(PureState::normalized(v)?) } else { None };
    Ok(DepState { state, weight })
}
