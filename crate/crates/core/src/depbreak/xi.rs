use serde::Serialize;

use crate::games::{Game, Radix};
use crate::infotheory::{coordinate_informations, CQState};
use crate::matcore::{CMatrix, DensityMatrix};
use crate::prob::{FiniteDistribution, Variable};
use crate::strategy::{born_joint, EntangledStrategy};

use super::{delta, question_dist, CoordinateSet, DepBreakError, Player};

/// Cap on `|X|^n · d²` entries assembled per cq-state.
pub const MAX_XI_ENTRIES: usize = 4_000_000;

#[derive(Debug, Clone, Serialize)]
pub struct XiReport {
    pub avg_mi: f64,
    /// Average of `I(X_i ; E_B)` per free coordinate (1-based).
    pub per_coordinate: Vec<(usize, f64)>,
    pub delta: f64,
    pub p_wc: f64,
    pub ok: bool,
}

/// `P(W_C)` summed directly over the Born table.
pub fn win_probability_on(g: &Game, s: &EntangledStrategy, coords: &[usize]) -> Result<f64, DepBreakError> {
    let n = s.n;
    let born = born_joint(g, n, s)?;
    let mut p = 0.0;
    born.for_each(|a, w| {
        if w > 0.0 && coords.iter().all(|&c| g.wins(a[c], a[n + c], a[2 * n + c], a[3 * n + c])) {
            p += w;
        }
    });
    Ok(p)
}

/// Average over `(ω, a_C)` and free `i` of `I(X_i ; E_B)` in the state where Alice has
/// measured `a_C` and Bob's share is left unmeasured, against
/// `δ = (1/m)(log₂ 1/P(W_C) + |C| log₂ |A||B|)`.
pub fn xi_raz_check(g: &Game, s: &EntangledStrategy, set: &CoordinateSet) -> Result<XiReport, DepBreakError> {
    s.check_game(g)?;
    let n = s.n;
    let d = s.d;
    let xs = g.alice_tuples(n);
    let ans = g.alice_answers(n);
    let size = xs.count().saturating_mul(d * d);
    if size > MAX_XI_ENTRIES {
        return Err(DepBreakError::TooLarge(size as u128));
    }
    let kept = Radix::new(g.a_size(), set.c.len());
    let m = s.state_matrix();
    let mt = m.transpose();
    let mc = m.map(|z| z.conj());
    // Bob's unnormalized share after Alice's outcome a_C on question tuple x.
    let mut shares: Vec<Vec<CMatrix>> = Vec::with_capacity(xs.count());
    for q in 0..xs.count() {
        let mut per = vec![CMatrix::zeros(d, d); kept.count()];
        for a in 0..ans.count() {
            let mut k = 0;
            for &c in &set.c {
                k = k * ans.base + ans.digit(a, c);
            }
            per[k] += s.alice.element(q, a);
        }
        shares.push(per.iter().map(|e| &mt * e.map(|z| z.conj()) * &mc).collect());
    }
    let vars: Vec<Variable> = (0..n).map(|i| Variable::new(format!("X{}", i + 1), g.x_size())).collect();
    let omegas = set.omegas(g);
    let mut per_coord = vec![0.0; set.m()];
    for (om, p_om) in &omegas {
        let dists: Vec<Vec<f64>> = om.0.iter().map(|&f| question_dist(g, Player::Alice, f)).collect();
        let px: Vec<f64> = (0..xs.count()).map(|q| (0..n).map(|k| dists[k][xs.digit(q, k)]).product()).collect();
        for k in 0..kept.count() {
            let weights: Vec<f64> = (0..xs.count()).map(|q| if px[q] > 0.0 { px[q] * shares[q][k].trace().re.max(0.0) } else { 0.0 }).collect();
            let p_ac: f64 = weights.iter().sum();
            if p_ac <= 1e-14 {
                continue;
            }
            let blocks = (0..xs.count())
                .map(|q| {
                    if weights[q] > 0.0 {
                        DensityMatrix::from_unnormalized(shares[q][k].clone())
                    } else {
                        Ok(DensityMatrix::maximally_mixed(d))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            let cq = CQState::new(FiniteDistribution::from_unnormalized(vars.clone(), weights)?, blocks)?;
            let info = coordinate_informations(&cq)?;
            for (slot, &i) in set.free.iter().enumerate() {
                per_coord[slot] += p_om * p_ac * info[i];
            }
        }
    }
    let avg_mi = per_coord.iter().sum::<f64>() / set.m() as f64;
    let p_wc = win_probability_on(g, s, &set.c)?;
    if p_wc <= 0.0 {
        return Err(DepBreakError::ZeroWinProbability);
    }
    let delta = delta(g, set, p_wc);
    Ok(XiReport {
        avg_mi,
        per_coordinate: set.free.iter().map(|i| i + 1).zip(per_coord).collect(),
        delta,
        p_wc,
        ok: avg_mi <= delta + 1e-6,
    })
}
