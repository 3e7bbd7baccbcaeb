use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::games::{Game, Radix};
use crate::matcore::{self, identity, local_expectation, mat_sqrt, min_eigenvalue, CMatrix, PureState};
use crate::prob::FiniteDistribution;
use crate::strategy::{symmetrize, EntangledStrategy};

use super::{
    aligned_operators, coarse_povm, dep_state, fine_povm, omega_of, question_dist, CoordFix, CoordinateSet, DepBreakError,
    DepState, OmegaValue, Player,
};

/// One player's operators for a fixed `(ω_{-i}, ω_i)`: coarse effects, aligned factors and,
/// for the player's own fixing, fine measurements. All indexed by the answer sub-tuple on `C`.
#[derive(Debug, Clone)]
pub struct SideOps {
    pub coarse: Vec<CMatrix>,
    pub s: Vec<CMatrix>,
    pub u: Vec<CMatrix>,
    /// Per kept tuple: effects for each answer at the open coordinate, then the null effect.
    pub fine: Vec<Vec<CMatrix>>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Diagnostics {
    pub contexts: usize,
    pub absent_states: usize,
    pub max_coarse_completeness: f64,
    pub min_coarse_eigen: f64,
    pub max_factor_error: f64,
    pub max_alignment_error: f64,
    pub max_fine_projector_error: f64,
    pub min_fine_eigen: f64,
    pub max_weight_sum_error: f64,
}

impl Diagnostics {
    fn merge(&mut self, o: &Diagnostics) {
        self.contexts += o.contexts;
        self.absent_states += o.absent_states;
        self.max_coarse_completeness = self.max_coarse_completeness.max(o.max_coarse_completeness);
        self.min_coarse_eigen = self.min_coarse_eigen.min(o.min_coarse_eigen);
        self.max_factor_error = self.max_factor_error.max(o.max_factor_error);
        self.max_alignment_error = self.max_alignment_error.max(o.max_alignment_error);
        self.max_fine_projector_error = self.max_fine_projector_error.max(o.max_fine_projector_error);
        self.min_fine_eigen = self.min_fine_eigen.min(o.min_fine_eigen);
        self.max_weight_sum_error = self.max_weight_sum_error.max(o.max_weight_sum_error);
    }
}

/// Everything attached to one context `(i, ω_{-i}, x_i, y_i, a_C, b_C)`.
#[derive(Debug, Clone)]
pub struct DepBreakBundle {
    pub coordinate: usize,
    pub omega: usize,
    pub x: usize,
    pub y: usize,
    pub a_c: usize,
    pub b_c: usize,
    /// `Ψ_{r,x,y}` with its weight `P(a_C, b_C | ω_{-i}, x_i, y_i)`.
    pub main: DepState,
    /// `Ψ_{r,x}`: coordinate `i` fixed through Alice's question.
    pub alice_fixed: DepState,
    /// `Ψ_{r,y}`: coordinate `i` fixed through Bob's question.
    pub bob_fixed: DepState,
    pub alice: Arc<SideOps>,
    pub bob: Arc<SideOps>,
    pub alice_cross: Arc<SideOps>,
    pub bob_cross: Arc<SideOps>,
    /// `Tr((Â^{a} ⊗ B̂^{b}) Ψ)` row-major over `(a_i, b_i)`; empty when the state is absent.
    pub predicted: Vec<f64>,
}

impl DepBreakBundle {
    pub fn alice_povm(&self) -> &[CMatrix] {
        &self.alice.fine[self.a_c]
    }

    pub fn bob_povm(&self) -> &[CMatrix] {
        &self.bob.fine[self.b_c]
    }
}

/// All contexts for one open coordinate.
#[derive(Debug, Clone)]
pub struct CoordinateBundles {
    pub coordinate: usize,
    pub omegas: Vec<(OmegaValue, f64)>,
    pub nx: usize,
    pub ny: usize,
    pub nac: usize,
    pub nbc: usize,
    pub contexts: Vec<Option<DepBreakBundle>>,
}

impl CoordinateBundles {
    pub fn index(&self, omega: usize, x: usize, y: usize, a_c: usize, b_c: usize) -> usize {
        (((omega * self.nx + x) * self.ny + y) * self.nac + a_c) * self.nbc + b_c
    }

    pub fn get(&self, omega: usize, x: usize, y: usize, a_c: usize, b_c: usize) -> Option<&DepBreakBundle> {
        self.contexts[self.index(omega, x, y, a_c, b_c)].as_ref()
    }

    pub fn iter(&self) -> impl Iterator<Item = &DepBreakBundle> {
        self.contexts.iter().flatten()
    }
}

/// Dependency-breaking constructions for every free coordinate.
#[derive(Debug, Clone)]
pub struct DepBreak {
    pub set: CoordinateSet,
    pub strategy: EntangledStrategy,
    pub game: Game,
    pub p_wc: f64,
    pub coords: Vec<CoordinateBundles>,
    pub diagnostics: Diagnostics,
}

struct OmegaOps {
    alice_own: Vec<Option<Arc<SideOps>>>,
    alice_cross: Vec<Option<Arc<SideOps>>>,
    bob_own: Vec<Option<Arc<SideOps>>>,
    bob_cross: Vec<Option<Arc<SideOps>>>,
}

struct Shared<'a> {
    g: &'a Game,
    s: &'a EntangledStrategy,
    set: &'a CoordinateSet,
    sqrt_rho: CMatrix,
}

impl Shared<'_> {
    fn side(&self, player: Player, omega: &OmegaValue, i: usize, fix: CoordFix, own: bool, diag: &mut Diagnostics) -> Result<Option<Arc<SideOps>>, DepBreakError> {
        let om = omega.with(i, fix);
        let dists: Vec<Vec<f64>> = om.0.iter().map(|&f| question_dist(self.g, player, f)).collect();
        if dists.iter().any(|d| d.iter().sum::<f64>() <= 0.0) {
            return Ok(None);
        }
        let nans = match player {
            Player::Alice => self.g.a_size(),
            Player::Bob => self.g.b_size(),
        };
        let d = self.s.d;
        let mut keep_fine = self.set.c.clone();
        keep_fine.push(i);
        let fine_all = if own { Some(coarse_povm(self.g, self.s, player, &dists, &keep_fine)?) } else { None };
        let coarse = match &fine_all {
            Some(f) => f.chunks(nans).map(|ch| ch.iter().fold(CMatrix::zeros(d, d), |acc, m| acc + m)).collect(),
            None => coarse_povm(self.g, self.s, player, &dists, &self.set.c)?,
        };
        let total = coarse.iter().fold(CMatrix::zeros(d, d), |acc, m| acc + m);
        diag.max_coarse_completeness = diag.max_coarse_completeness.max(matcore::frobenius(&(total - identity(d))));
        let mut s_ops = Vec::with_capacity(coarse.len());
        let mut u_ops = Vec::with_capacity(coarse.len());
        let mut fine = Vec::new();
        for (k, a) in coarse.iter().enumerate() {
            diag.min_coarse_eigen = diag.min_coarse_eigen.min(min_eigenvalue(a)?);
            let al = aligned_operators(a, &self.sqrt_rho)?;
            diag.max_factor_error = diag.max_factor_error.max(matcore::frobenius(&(al.s.adjoint() * &al.s - a)));
            let sr = &al.s * &self.sqrt_rho;
            let herm = matcore::hermitian_deviation(&sr);
            let lo = min_eigenvalue(&matcore::hermitize(&sr))?;
            diag.max_alignment_error = diag.max_alignment_error.max(herm.max(-lo));
            if let Some(f) = &fine_all {
                let povm = fine_povm(&al.s, &f[k * nans..(k + 1) * nans])?;
                let proj = povm[..nans].iter().fold(CMatrix::zeros(d, d), |acc, m| acc + m);
                diag.max_fine_projector_error = diag.max_fine_projector_error.max(matcore::frobenius(&(&proj * &proj - &proj)));
                for e in &povm {
                    diag.min_fine_eigen = diag.min_fine_eigen.min(min_eigenvalue(e)?);
                }
                fine.push(povm);
            }
            s_ops.push(al.s);
            u_ops.push(al.u);
        }
        Ok(Some(Arc::new(SideOps { coarse, s: s_ops, u: u_ops, fine })))
    }

    fn omega_ops(&self, omega: &OmegaValue, i: usize, diag: &mut Diagnostics) -> Result<OmegaOps, DepBreakError> {
        let (nx, ny) = (self.g.x_size(), self.g.y_size());
        let mut ops = OmegaOps { alice_own: Vec::new(), alice_cross: Vec::new(), bob_own: Vec::new(), bob_cross: Vec::new() };
        for x in 0..nx {
            let live = self.g.mu_x(x) > 0.0;
            ops.alice_own.push(if live { self.side(Player::Alice, omega, i, CoordFix::Alice(x), true, diag)? } else { None });
            ops.bob_cross.push(if live { self.side(Player::Bob, omega, i, CoordFix::Alice(x), false, diag)? } else { None });
        }
        for y in 0..ny {
            let live = self.g.mu_y(y) > 0.0;
            ops.bob_own.push(if live { self.side(Player::Bob, omega, i, CoordFix::Bob(y), true, diag)? } else { None });
            ops.alice_cross.push(if live { self.side(Player::Alice, omega, i, CoordFix::Bob(y), false, diag)? } else { None });
        }
        Ok(ops)
    }

    /// Contexts for one `(i, ω_{-i})`, laid out as `(x, y, a_C, b_C)`.
    fn block(&self, i: usize, w: usize, omega: &OmegaValue) -> Result<(Vec<Option<DepBreakBundle>>, Diagnostics), DepBreakError> {
        let mut diag = Diagnostics { min_coarse_eigen: f64::INFINITY, min_fine_eigen: f64::INFINITY, ..Default::default() };
        let ops = self.omega_ops(omega, i, &mut diag)?;
        let g = self.g;
        let (nx, ny) = (g.x_size(), g.y_size());
        let nac = Radix::new(g.a_size(), self.set.c.len()).count();
        let nbc = Radix::new(g.b_size(), self.set.c.len()).count();
        let (na, nb) = (g.a_size(), g.b_size());
        let psi = &self.s.psi;
        let mut out = Vec::with_capacity(nx * ny * nac * nbc);
        for x in 0..nx {
            for y in 0..ny {
                if g.mu(x, y) <= 0.0 {
                    out.extend((0..nac * nbc).map(|_| None));
                    continue;
                }
                let (Some(al), Some(bo), Some(ac), Some(bc)) =
                    (&ops.alice_own[x], &ops.bob_own[y], &ops.alice_cross[y], &ops.bob_cross[x])
                else {
                    return Err(DepBreakError::Inconsistent(format!("missing operators at x={x}, y={y}")));
                };
                let mut total = 0.0;
                for a_c in 0..nac {
                    for b_c in 0..nbc {
                        let main = dep_state(&al.s[a_c], &bo.s[b_c], psi)?;
                        let alice_fixed = dep_state(&al.s[a_c], &bc.s[b_c], psi)?;
                        let bob_fixed = dep_state(&ac.s[a_c], &bo.s[b_c], psi)?;
                        total += main.weight;
                        diag.contexts += 1;
                        let mut predicted = Vec::new();
                        match &main.state {
                            Some(st) => {
                                predicted.reserve(na * nb);
                                for a in 0..na {
                                    for b in 0..nb {
                                        let v = local_expectation(&al.fine[a_c][a], &bo.fine[b_c][b], st.as_vector())?;
                                        predicted.push(v.re);
                                    }
                                }
                            }
                            None => diag.absent_states += 1,
                        }
                        out.push(Some(DepBreakBundle {
                            coordinate: i,
                            omega: w,
                            x,
                            y,
                            a_c,
                            b_c,
                            main,
                            alice_fixed,
                            bob_fixed,
                            alice: al.clone(),
                            bob: bo.clone(),
                            alice_cross: ac.clone(),
                            bob_cross: bc.clone(),
                            predicted,
                        }));
                    }
                }
                diag.max_weight_sum_error = diag.max_weight_sum_error.max((total - 1.0).abs());
            }
        }
        Ok((out, diag))
    }
}

/// Whether `(ω, a_C, b_C)` lies in `W_C`; coordinates of `C` are read from the `Both` fixings.
pub fn context_wins(g: &Game, set: &CoordinateSet, omega: &OmegaValue, a_c: usize, b_c: usize) -> bool {
    let k = set.c.len();
    let (ar, br) = (Radix::new(g.a_size(), k), Radix::new(g.b_size(), k));
    set.c.iter().enumerate().all(|(p, &c)| match omega.0[c] {
        CoordFix::Both(x, y) => g.wins(x, y, ar.digit(a_c, p), br.digit(b_c, p)),
        _ => false,
    })
}

impl DepBreak {
    /// Build every bundle. The strategy is first rotated to a symmetric state if needed.
    pub fn build(g: &Game, s: &EntangledStrategy, set: CoordinateSet) -> Result<Self, DepBreakError> {
        s.check_game(g)?;
        if s.n != set.n {
            return Err(DepBreakError::BadSet(format!("strategy has n = {}, set has n = {}", s.n, set.n)));
        }
        let strategy = if s.is_symmetric(1e-12) { s.clone() } else { symmetrize(s)? };
        let sqrt_rho = mat_sqrt(&strategy.reduced_state())?;
        let shared = Shared { g, s: &strategy, set: &set, sqrt_rho };
        let nac = Radix::new(g.a_size(), set.c.len()).count();
        let nbc = Radix::new(g.b_size(), set.c.len()).count();
        let mut coords = Vec::new();
        let mut diagnostics = Diagnostics { min_coarse_eigen: f64::INFINITY, min_fine_eigen: f64::INFINITY, ..Default::default() };
        for &i in &set.free {
            let omegas = set.omegas_without(g, i);
            let blocks: Vec<_> = omegas
                .par_iter()
                .enumerate()
                .map(|(w, (om, _))| shared.block(i, w, om))
                .collect::<Result<_, _>>()?;
            let mut contexts = Vec::with_capacity(omegas.len() * g.x_size() * g.y_size() * nac * nbc);
            for (b, d) in blocks {
                diagnostics.merge(&d);
                contexts.extend(b);
            }
            coords.push(CoordinateBundles { coordinate: i, omegas, nx: g.x_size(), ny: g.y_size(), nac, nbc, contexts });
        }
        let first = &coords[0];
        let mut p_wc = 0.0;
        for b in first.iter() {
            let (om, p) = &first.omegas[b.omega];
            if context_wins(g, &set, om, b.a_c, b.b_c) {
                p_wc += p * g.mu(b.x, b.y) * b.main.weight;
            }
        }
        Ok(Self { set, strategy, game: g.clone(), p_wc, coords, diagnostics })
    }

    pub fn coordinate(&self, i: usize) -> Option<&CoordinateBundles> {
        self.coords.iter().find(|c| c.coordinate == i)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContextKey {
    pub i: usize,
    pub omega: OmegaValue,
    pub x: usize,
    pub y: usize,
    pub a_c: usize,
    pub b_c: usize,
}

/// Unnormalized `(a_i, b_i)` tables per context, read directly off the extended joint.
#[derive(Debug, Clone)]
pub struct ConditionalOracle {
    pub na: usize,
    pub nb: usize,
    pub tables: HashMap<ContextKey, Vec<f64>>,
    /// Mass of each `(i, ω_{-i}, x_i, y_i)` summed over `(a_C, b_C)`.
    pub totals: HashMap<(usize, OmegaValue, usize, usize), f64>,
}

impl ConditionalOracle {
    pub fn from_joint(g: &Game, joint: &FiniteDistribution, set: &CoordinateSet) -> Self {
        let (n, m) = (set.n, set.m());
        let off = 2 * m;
        let (na, nb) = (g.a_size(), g.b_size());
        let mut tables: HashMap<ContextKey, Vec<f64>> = HashMap::new();
        let mut totals: HashMap<(usize, OmegaValue, usize, usize), f64> = HashMap::new();
        joint.for_each(|a, w| {
            if w <= 0.0 {
                return;
            }
            let mut a_c = 0;
            let mut b_c = 0;
            for &c in &set.c {
                a_c = a_c * na + a[off + 2 * n + c];
                b_c = b_c * nb + a[off + 3 * n + c];
            }
            for &i in &set.free {
                let omega = omega_of(set, a, Some(i));
                let (x, y) = (a[off + i], a[off + n + i]);
                let (ai, bi) = (a[off + 2 * n + i], a[off + 3 * n + i]);
                *totals.entry((i, omega.clone(), x, y)).or_insert(0.0) += w;
                tables.entry(ContextKey { i, omega, x, y, a_c, b_c }).or_insert_with(|| vec![0.0; na * nb])[ai * nb + bi] += w;
            }
        });
        Self { na, nb, tables, totals }
    }

    /// `P(a_C, b_C | ω_{-i}, x_i, y_i)`.
    pub fn weight(&self, key: &ContextKey) -> f64 {
        let tot = self.totals.get(&(key.i, key.omega.clone(), key.x, key.y)).copied().unwrap_or(0.0);
        let t: f64 = self.tables.get(key).map_or(0.0, |v| v.iter().sum());
        if tot > 0.0 {
            t / tot
        } else {
            0.0
        }
    }

    /// `P(a_i, b_i | r_{-i}, x_i, y_i)`, or `None` for a zero-mass context.
    pub fn conditional(&self, key: &ContextKey) -> Option<Vec<f64>> {
        let t = self.tables.get(key)?;
        let s: f64 = t.iter().sum();
        (s > 0.0).then(|| t.iter().map(|v| v / s).collect())
    }
}

fn key_of(cb: &CoordinateBundles, b: &DepBreakBundle) -> ContextKey {
    ContextKey { i: cb.coordinate, omega: cb.omegas[b.omega].0.clone(), x: b.x, y: b.y, a_c: b.a_c, b_c: b.b_c }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub max_residual: f64,
    /// Per open coordinate (1-based), the worst residual.
    pub per_coordinate: Vec<(usize, f64)>,
    pub contexts_checked: usize,
    pub contexts_skipped: usize,
}

/// Worst gap between the predicted `(a_i, b_i)` tables and the enumerated conditionals.
pub fn usefulness_check(dep: &DepBreak, oracle: &ConditionalOracle) -> ResidualReport {
    let mut rep = ResidualReport { max_residual: 0.0, per_coordinate: Vec::new(), contexts_checked: 0, contexts_skipped: 0 };
    for cb in &dep.coords {
        let mut worst = 0.0f64;
        for b in cb.iter() {
            let key = key_of(cb, b);
            match (b.main.state.is_some(), oracle.conditional(&key)) {
                (true, Some(p)) => {
                    rep.contexts_checked += 1;
                    for (q, r) in b.predicted.iter().zip(&p) {
                        worst = worst.max((q - r).abs());
                    }
                }
                _ => rep.contexts_skipped += 1,
            }
        }
        rep.max_residual = rep.max_residual.max(worst);
        rep.per_coordinate.push((cb.coordinate + 1, worst));
    }
    rep
}

/// Worst gap between state weights and enumerated `P(a_C, b_C | ω_{-i}, x_i, y_i)`.
pub fn weights_check(dep: &DepBreak, oracle: &ConditionalOracle) -> ResidualReport {
    let mut rep = ResidualReport { max_residual: 0.0, per_coordinate: Vec::new(), contexts_checked: 0, contexts_skipped: 0 };
    for cb in &dep.coords {
        let mut worst = 0.0f64;
        for b in cb.iter() {
            let key = key_of(cb, b);
            rep.contexts_checked += 1;
            worst = worst.max((b.main.weight - oracle.weight(&key)).abs());
        }
        rep.max_residual = rep.max_residual.max(worst);
        rep.per_coordinate.push((cb.coordinate + 1, worst));
    }
    rep
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleabilityEntry {
    pub coordinate: usize,
    pub d_bob: f64,
    pub d_alice: f64,
    pub d_cross: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SampleabilityReport {
    pub per_coordinate: Vec<SampleabilityEntry>,
    pub d_bob: f64,
    pub d_alice: f64,
    pub d_cross: f64,
    /// Question mass with no surviving context, excluded before renormalizing.
    pub skipped_mass: f64,
    /// Contexts whose fixed-question variant state has zero weight; counted at distance 1.
    pub absent_variants: usize,
    pub max_triangle_violation: f64,
    pub delta: f64,
    /// `d_bob`, `d_alice`, `d_cross` divided by `(δ^{1/4} / P(W_C))^{1/12}`; infinite when `δ = 0`.
    pub ratios: [f64; 3],
}

fn dist(a: &PureState, b: &PureState) -> f64 {
    (a.as_vector() - b.as_vector()).norm()
}

/// `E ‖Ψ_{r,x,y} − Ψ_{r,y}‖`, `E ‖Ψ_{r,x,y} − Ψ_{r,x}‖` and `E ‖Ψ_{r,x} − Ψ_{r,y}‖` under
/// `P_{X_i Y_i} · P_{R_{-i} | x_i, y_i, W_C}`.
pub fn sampleability_distances(dep: &DepBreak) -> SampleabilityReport {
    let g = &dep.game;
    let mut rep = SampleabilityReport {
        per_coordinate: Vec::new(),
        d_bob: 0.0,
        d_alice: 0.0,
        d_cross: 0.0,
        skipped_mass: 0.0,
        absent_variants: 0,
        max_triangle_violation: 0.0,
        delta: super::delta(g, &dep.set, dep.p_wc),
        ratios: [0.0; 3],
    };
    for cb in &dep.coords {
        let mut acc = [0.0f64; 3];
        let mut kept = 0.0;
        for x in 0..cb.nx {
            for y in 0..cb.ny {
                let mu = g.mu(x, y);
                if mu <= 0.0 {
                    continue;
                }
                let mut local = [0.0f64; 3];
                let mut total = 0.0;
                for (w, (om, p)) in cb.omegas.iter().enumerate() {
                    for a_c in 0..cb.nac {
                        for b_c in 0..cb.nbc {
                            let Some(b) = cb.get(w, x, y, a_c, b_c) else { continue };
                            let Some(main) = &b.main.state else { continue };
                            if !context_wins(g, &dep.set, om, a_c, b_c) {
                                continue;
                            }
                            let pi = p * b.main.weight;
                            let (db, da, dc) = match (&b.alice_fixed.state, &b.bob_fixed.state) {
                                (Some(sa), Some(sb)) => {
                                    let (db, da, dc) = (dist(main, sb), dist(main, sa), dist(sa, sb));
                                    rep.max_triangle_violation = rep.max_triangle_violation.max(dc - da - db);
                                    (db, da, dc)
                                }
                                (sa, sb) => {
                                    rep.absent_variants += 1;
                                    let da = sa.as_ref().map_or(1.0, |s| dist(main, s));
                                    let db = sb.as_ref().map_or(1.0, |s| dist(main, s));
                                    (db, da, 1.0)
                                }
                            };
                            local[0] += pi * db;
                            local[1] += pi * da;
                            local[2] += pi * dc;
                            total += pi;
                        }
                    }
                }
                if total <= 0.0 {
                    rep.skipped_mass += mu;
                    continue;
                }
                kept += mu;
                for k in 0..3 {
                    acc[k] += mu * local[k] / total;
                }
            }
        }
        let norm = |v: f64| if kept > 0.0 { v / kept } else { 0.0 };
        rep.per_coordinate.push(SampleabilityEntry {
            coordinate: cb.coordinate + 1,
            d_bob: norm(acc[0]),
            d_alice: norm(acc[1]),
            d_cross: norm(acc[2]),
        });
    }
    let m = rep.per_coordinate.len() as f64;
    rep.d_bob = rep.per_coordinate.iter().map(|e| e.d_bob).sum::<f64>() / m;
    rep.d_alice = rep.per_coordinate.iter().map(|e| e.d_alice).sum::<f64>() / m;
    rep.d_cross = rep.per_coordinate.iter().map(|e| e.d_cross).sum::<f64>() / m;
    let scale = (rep.delta.powf(0.25) / dep.p_wc).powf(1.0 / 12.0);
    let ratio = |v: f64| if v == 0.0 { 0.0 } else { v / scale };
    rep.ratios = [ratio(rep.d_bob), ratio(rep.d_alice), ratio(rep.d_cross)];
    rep
}

fn digits(r: &Radix, idx: usize) -> String {
    if r.n == 0 {
        return "-".into();
    }
    r.decode(idx).iter().map(|d| d.to_string()).collect()
}

/// Per-context diagnostic table with columns `i, omega, aC, bC, xi, yi, weight, residual`
/// (coordinates and questions 1-based as in reports; answers as digit strings).
pub fn bundle_csv(dep: &DepBreak, oracle: Option<&ConditionalOracle>) -> Result<String, csv::Error> {
    let g = &dep.game;
    let k = dep.set.c.len();
    let (ar, br) = (Radix::new(g.a_size(), k), Radix::new(g.b_size(), k));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["i", "omega", "aC", "bC", "xi", "yi", "weight", "residual"])?;
    for cb in &dep.coords {
        for b in cb.iter() {
            let residual = match (oracle, b.main.state.is_some()) {
                (Some(o), true) => o
                    .conditional(&key_of(cb, b))
                    .map(|p| b.predicted.iter().zip(&p).map(|(q, r)| (q - r).abs()).fold(0.0, f64::max)),
                _ => None,
            };
            w.write_record([
                (cb.coordinate + 1).to_string(),
                cb.omegas[b.omega].0.label(),
                digits(&ar, b.a_c),
                digits(&br, b.b_c),
                (b.x + 1).to_string(),
                (b.y + 1).to_string(),
                format!("{:.12e}", b.main.weight),
                residual.map_or_else(String::new, |r| format!("{r:.3e}")),
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
