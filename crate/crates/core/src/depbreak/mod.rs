//! Dependency-breaking variables, the choice of conditioning set, skew distances,
//! and the operator/state constructions built on them.

mod bundles;
mod operators;
mod xi;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::games::{Game, GameError, Radix};
use crate::infotheory::InfoError;
use crate::matcore::MatError;
use crate::prob::{Event, FiniteDistribution, ProbError, Variable};
use crate::strategy::{born_joint, StrategyError, StrategyRef};

pub use bundles::*;
pub use operators::*;
pub use xi::*;

#[derive(Debug, Error)]
pub enum DepBreakError {
    #[error("invalid coordinate set: {0}")]
    BadSet(String),
    #[error("the event of winning every coordinate in C has zero probability")]
    ZeroWinProbability,
    #[error("table with {0} entries exceeds the enumeration limit")]
    TooLarge(u128),
    #[error("inconsistent operator families: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Info(#[from] InfoError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Player {
    Alice,
    Bob,
}

/// What the dependency-breaking variable records about one coordinate.
/// Displayed with 1-based question labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CoordFix {
    /// The coordinate under study; its fixing is omitted.
    Open,
    /// `D = Alice`, `M = x`.
    Alice(usize),
    /// `D = Bob`, `M = y`.
    Bob(usize),
    /// A coordinate of `C`: both questions are fixed.
    Both(usize, usize),
}

impl fmt::Display for CoordFix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoordFix::Open => write!(f, "*"),
            CoordFix::Alice(x) => write!(f, "A{}", x + 1),
            CoordFix::Bob(y) => write!(f, "B{}", y + 1),
            CoordFix::Both(x, y) => write!(f, "X{}Y{}", x + 1, y + 1),
        }
    }
}

/// A value of `Ω` (or `Ω_{-i}` when one coordinate is [`CoordFix::Open`]), one entry per coordinate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct OmegaValue(pub Vec<CoordFix>);

impl OmegaValue {
    pub fn label(&self) -> String {
        self.0.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(",")
    }

    pub fn with(&self, i: usize, fix: CoordFix) -> Self {
        let mut v = self.0.clone();
        v[i] = fix;
        Self(v)
    }

    /// Prior probability of the recorded fixings (open coordinates contribute 1).
    pub fn prob(&self, g: &Game) -> f64 {
        self.0
            .iter()
            .map(|f| match *f {
                CoordFix::Open => 1.0,
                CoordFix::Alice(x) => 0.5 * g.mu_x(x),
                CoordFix::Bob(y) => 0.5 * g.mu_y(y),
                CoordFix::Both(x, y) => g.mu(x, y),
            })
            .product()
    }
}

/// Distribution of one player's question at a coordinate given its fixing.
/// An open coordinate gets the prior marginal.
pub fn question_dist(g: &Game, player: Player, fix: CoordFix) -> Vec<f64> {
    let (nx, ny) = (g.x_size(), g.y_size());
    match (player, fix) {
        (Player::Alice, CoordFix::Alice(x)) | (Player::Alice, CoordFix::Both(x, _)) => point_mass(nx, x),
        (Player::Bob, CoordFix::Bob(y)) | (Player::Bob, CoordFix::Both(_, y)) => point_mass(ny, y),
        (Player::Alice, CoordFix::Bob(y)) => {
            let m = g.mu_y(y);
            (0..nx).map(|x| if m > 0.0 { g.mu(x, y) / m } else { 0.0 }).collect()
        }
        (Player::Bob, CoordFix::Alice(x)) => {
            let m = g.mu_x(x);
            (0..ny).map(|y| if m > 0.0 { g.mu(x, y) / m } else { 0.0 }).collect()
        }
        (Player::Alice, CoordFix::Open) => (0..nx).map(|x| g.mu_x(x)).collect(),
        (Player::Bob, CoordFix::Open) => (0..ny).map(|y| g.mu_y(y)).collect(),
    }
}

fn point_mass(n: usize, k: usize) -> Vec<f64> {
    (0..n).map(|j| if j == k { 1.0 } else { 0.0 }).collect()
}

/// A conditioning set `C ⊂ [n]` together with its complement (0-based coordinates).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoordinateSet {
    pub n: usize,
    pub c: Vec<usize>,
    pub free: Vec<usize>,
}

impl CoordinateSet {
    pub fn new(n: usize, mut c: Vec<usize>) -> Result<Self, DepBreakError> {
        c.sort_unstable();
        c.dedup();
        if let Some(&bad) = c.iter().find(|&&i| i >= n) {
            return Err(DepBreakError::BadSet(format!("coordinate {} outside 1..={n}", bad + 1)));
        }
        let free: Vec<usize> = (0..n).filter(|i| !c.contains(i)).collect();
        if free.is_empty() {
            return Err(DepBreakError::BadSet("C must leave at least one coordinate free".into()));
        }
        Ok(Self { n, c, free })
    }

    pub fn m(&self) -> usize {
        self.free.len()
    }

    /// 1-based labels, for reports.
    pub fn public(&self) -> Vec<usize> {
        self.c.iter().map(|i| i + 1).collect()
    }

    /// All values of `Ω_{-i}` with positive prior probability, in a fixed order.
    pub fn omegas_without(&self, g: &Game, i: usize) -> Vec<(OmegaValue, f64)> {
        let options: Vec<Vec<CoordFix>> = (0..self.n)
            .map(|j| {
                if j == i {
                    vec![CoordFix::Open]
                } else if self.c.contains(&j) {
                    let mut v = Vec::new();
                    for x in 0..g.x_size() {
                        for y in 0..g.y_size() {
                            if g.mu(x, y) > 0.0 {
                                v.push(CoordFix::Both(x, y));
                            }
                        }
                    }
                    v
                } else {
                    let mut v: Vec<CoordFix> = (0..g.x_size()).filter(|&x| g.mu_x(x) > 0.0).map(CoordFix::Alice).collect();
                    v.extend((0..g.y_size()).filter(|&y| g.mu_y(y) > 0.0).map(CoordFix::Bob));
                    v
                }
            })
            .collect();
        let mut out = Vec::new();
        let mut idx = vec![0usize; self.n];
        loop {
            let om = OmegaValue(idx.iter().enumerate().map(|(j, &k)| options[j][k]).collect());
            let p = om.prob(g);
            if p > 0.0 {
                out.push((om, p));
            }
            let mut j = self.n;
            loop {
                if j == 0 {
                    return out;
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] < options[j].len() {
                    break;
                }
                idx[j] = 0;
            }
        }
    }

    /// All full values of `Ω` with positive prior probability.
    pub fn omegas(&self, g: &Game) -> Vec<(OmegaValue, f64)> {
        // Expand the first free coordinate's open slot.
        let i = self.free[0];
        let mut out = Vec::new();
        for (om, p) in self.omegas_without(g, i) {
            for x in 0..g.x_size() {
                if g.mu_x(x) > 0.0 {
                    out.push((om.with(i, CoordFix::Alice(x)), p * 0.5 * g.mu_x(x)));
                }
            }
            for y in 0..g.y_size() {
                if g.mu_y(y) > 0.0 {
                    out.push((om.with(i, CoordFix::Bob(y)), p * 0.5 * g.mu_y(y)));
                }
            }
        }
        out
    }
}

fn names_d(j: usize) -> String {
    format!("D{}", j + 1)
}
fn names_m(j: usize) -> String {
    format!("M{}", j + 1)
}

/// Joint distribution of `(D, M, X_[n], Y_[n], A_[n], B_[n])` with one `(D_j, M_j)` pair per
/// free coordinate. `D_j = 0` means the pair fixes Alice's question.
pub fn extended_joint<'a>(
    g: &Game,
    n: usize,
    s: impl Into<StrategyRef<'a>>,
    set: &CoordinateSet,
) -> Result<FiniteDistribution, DepBreakError> {
    let m = set.m();
    let k = g.x_size().max(g.y_size());
    let born = born_joint(g, n, s)?;
    let size = (born.len() as u128) * (2 * k as u128).pow(m as u32);
    if size > crate::prob::MAX_ENTRIES as u128 {
        return Err(DepBreakError::TooLarge(size));
    }
    let mut vars: Vec<Variable> = set.free.iter().map(|&j| Variable::new(names_d(j), 2)).collect();
    vars.extend(set.free.iter().map(|&j| Variable::new(names_m(j), k)));
    vars.extend(born.variables().iter().cloned());
    let dr = Radix::new(2, m);
    let mr = Radix::new(k, m);
    let blen = born.len();
    let mut weights = vec![0.0; size as usize];
    let scale = 0.5f64.powi(m as i32);
    born.for_each(|a, w| {
        if w == 0.0 {
            return;
        }
        let b = born.index(a);
        for di in 0..dr.count() {
            let mut mi = 0;
            for (p, &j) in set.free.iter().enumerate() {
                let q = if dr.digit(di, p) == 0 { a[j] } else { a[n + j] };
                mi = mi * k + q;
            }
            weights[(di * mr.count() + mi) * blen + b] = w * scale;
        }
    });
    Ok(FiniteDistribution::new(vars, weights)?)
}

/// The event `W_C` on the extended joint.
pub fn win_event(g: &Game, joint: &FiniteDistribution, set: &CoordinateSet) -> Event {
    let (n, off) = (set.n, 2 * set.m());
    Event::from_fn(joint, |a| set.c.iter().all(|&c| g.wins(a[off + c], a[off + n + c], a[off + 2 * n + c], a[off + 3 * n + c])))
}

/// Reads the value of `Ω_{-i}` off an extended-joint assignment.
pub fn omega_of(set: &CoordinateSet, a: &[usize], i: Option<usize>) -> OmegaValue {
    let (n, m) = (set.n, set.m());
    let off = 2 * m;
    let mut fixes = vec![CoordFix::Open; n];
    for (p, &j) in set.free.iter().enumerate() {
        if Some(j) == i {
            continue;
        }
        fixes[j] = if a[p] == 0 { CoordFix::Alice(a[m + p]) } else { CoordFix::Bob(a[m + p]) };
    }
    for &c in &set.c {
        fixes[c] = CoordFix::Both(a[off + c], a[off + n + c]);
    }
    OmegaValue(fixes)
}

#[derive(Debug, Clone, Serialize)]
pub struct ChooseReport {
    /// 0-based coordinates.
    pub c: Vec<usize>,
    pub score: f64,
    pub threshold_met: bool,
    pub p_wc: f64,
    pub subsets_considered: usize,
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in start..n {
            cur.push(j);
            rec(j + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Exhaustive search over sets `C` with `|C| ≤ t_max` maximizing `E_{i∉C} P(W_i | W_C)`.
/// `born` is the question/answer table of [`born_joint`].
pub fn choose_c(born: &FiniteDistribution, g: &Game, n: usize, eps: f64, t_max: usize) -> Result<ChooseReport, DepBreakError> {
    if n == 0 || n > 20 {
        return Err(DepBreakError::BadSet(format!("n = {n} outside the supported range 1..=20")));
    }
    let t_max = t_max.min(n - 1);
    let mut pattern = vec![0.0; 1 << n];
    born.for_each(|a, w| {
        if w > 0.0 {
            let mut mask = 0usize;
            for i in 0..n {
                if g.wins(a[i], a[n + i], a[2 * n + i], a[3 * n + i]) {
                    mask |= 1 << i;
                }
            }
            pattern[mask] += w;
        }
    });
    let mass = |req: usize| -> f64 { pattern.iter().enumerate().filter(|(p, _)| p & req == req).map(|(_, w)| w).sum() };
    let mut best: Option<ChooseReport> = None;
    let mut considered = 0;
    for k in 0..=t_max {
        for c in combinations(n, k) {
            let cm: usize = c.iter().map(|i| 1 << i).sum();
            let p_wc = mass(cm);
            if p_wc <= 0.0 {
                continue;
            }
            considered += 1;
            let free: Vec<usize> = (0..n).filter(|i| cm & (1 << i) == 0).collect();
            let score = free.iter().map(|&i| mass(cm | (1 << i)) / p_wc).sum::<f64>() / free.len() as f64;
            if best.as_ref().map_or(true, |b| score > b.score + 1e-12) {
                best = Some(ChooseReport { c, score, threshold_met: false, p_wc, subsets_considered: 0 });
            }
        }
    }
    let mut best = best.ok_or(DepBreakError::ZeroWinProbability)?;
    best.threshold_met = best.score >= 1.0 - eps / 2.0;
    best.subsets_considered = considered;
    Ok(best)
}

#[derive(Debug, Clone, Serialize)]
pub struct SkewEntry {
    /// 1-based coordinate.
    pub coordinate: usize,
    pub item1: f64,
    pub item2: f64,
    pub item3: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SkewReport {
    pub per_coordinate: Vec<SkewEntry>,
    pub avg_item1: f64,
    pub avg_item2: f64,
    pub avg_item3: f64,
    pub p_wc: f64,
    pub delta: f64,
    /// `avg_item_k / √δ` for k = 1, 2, 3.
    pub ratios: [f64; 3],
}

/// `δ = (1/m)(log₂ 1/P(W_C) + |C| log₂ |A||B|)`.
pub fn delta(g: &Game, set: &CoordinateSet, p_wc: f64) -> f64 {
    ((1.0 / p_wc).log2() + set.c.len() as f64 * ((g.a_size() * g.b_size()) as f64).log2()) / set.m() as f64
}

/// Total variation distances of the three skew statements, computed exactly from the extended joint.
pub fn skew_distances(g: &Game, joint: &FiniteDistribution, set: &CoordinateSet) -> Result<SkewReport, DepBreakError> {
    let wc = win_event(g, joint, set);
    let p_wc = joint.prob(&wc)?;
    if p_wc <= crate::prob::ZERO_PROB {
        return Err(DepBreakError::ZeroWinProbability);
    }
    let cond = joint.condition(&wc)?;
    let mut per = Vec::new();
    for &i in &set.free {
        let (xi, yi) = (format!("X{}", i + 1), format!("Y{}", i + 1));
        let mut rest: Vec<String> = set.free.iter().filter(|&&j| j != i).flat_map(|&j| [names_d(j), names_m(j)]).collect();
        for p in ["X", "Y", "A", "B"] {
            rest.extend(set.c.iter().map(|c| format!("{p}{}", c + 1)));
        }
        let rest: Vec<&str> = rest.iter().map(|s| s.as_str()).collect();
        let own: Vec<String> = vec![names_d(i), names_m(i), xi.clone(), yi.clone()];
        let own: Vec<&str> = own.iter().map(|s| s.as_str()).collect();
        let item1 = cond.marginal(&own)?.tv_distance(&joint.marginal(&own)?)?;

        let mut full = vec![xi.as_str(), yi.as_str()];
        full.extend(rest.iter().copied());
        let p = cond.marginal(&full)?;
        let prior = joint.marginal(&[xi.as_str(), yi.as_str()])?;
        let (nx, ny) = (g.x_size(), g.y_size());
        let r = p.len() / (nx * ny);
        let item = |by_x: bool| -> Result<f64, DepBreakError> {
            let key = if by_x { xi.as_str() } else { yi.as_str() };
            let mut names = vec![key];
            names.extend(rest.iter().copied());
            let cm = cond.marginal(&names)?;
            let w = cm.weights();
            let card = if by_x { nx } else { ny };
            let tot: Vec<f64> = (0..card).map(|k| w[k * r..(k + 1) * r].iter().sum()).collect();
            let mut l1 = 0.0;
            for x in 0..nx {
                for y in 0..ny {
                    let k = if by_x { x } else { y };
                    let pr = prior.weights()[x * ny + y];
                    for ri in 0..r {
                        let q = if tot[k] > 0.0 { pr * w[k * r + ri] / tot[k] } else { 0.0 };
                        l1 += (p.weights()[(x * ny + y) * r + ri] - q).abs();
                    }
                }
            }
            Ok(0.5 * l1)
        };
        let item2 = item(true)?;
        let item3 = item(false)?;
        per.push(SkewEntry { coordinate: i + 1, item1, item2, item3 });
    }
    let m = per.len() as f64;
    let avg = |f: fn(&SkewEntry) -> f64| per.iter().map(f).sum::<f64>() / m;
    let (a1, a2, a3) = (avg(|e| e.item1), avg(|e| e.item2), avg(|e| e.item3));
    let dl = delta(g, set, p_wc);
    let sd = dl.sqrt();
    let ratio = |a: f64| if sd > 0.0 { a / sd } else if a == 0.0 { 0.0 } else { f64::INFINITY };
    Ok(SkewReport {
        per_coordinate: per,
        avg_item1: a1,
        avg_item2: a2,
        avg_item3: a3,
        p_wc,
        delta: dl,
        ratios: [ratio(a1), ratio(a2), ratio(a3)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::fixtures::chsh;
    use crate::strategy::fixtures::{detprod, printing, tsirelson};
    use crate::strategy::EntangledStrategy;

    fn run(s: &EntangledStrategy, n: usize, c: Vec<usize>) {
        let g = chsh();
        let set = CoordinateSet::new(n, c).unwrap();
        let joint = extended_joint(&g, n, s, &set).unwrap();
        let dep = DepBreak::build(&g, s, set.clone()).unwrap();
        let oracle = ConditionalOracle::from_joint(&g, &joint, &set);
        let u = usefulness_check(&dep, &oracle);
        let w = weights_check(&dep, &oracle);
        let sk = skew_distances(&g, &joint, &set).unwrap();
        let sa = sampleability_distances(&dep);
        assert!(sa.max_triangle_violation <= 1e-9);
        let xi = xi_raz_check(&g, s, &set).unwrap();
        assert!(u.max_residual <= 1e-8);
        assert!(w.max_residual <= 1e-8);
        assert!((dep.p_wc - sk.p_wc).abs() < 1e-10);
        assert!(xi.ok);
    }

    #[test]
    fn oracle_checks_on_fixtures() {
        run(&tsirelson(2), 2, vec![1]);
        run(&printing(2), 2, vec![1]);
        run(&detprod(2).to_entangled(&chsh()).unwrap(), 2, vec![1]);
        run(&printing(3), 3, vec![2]);
    }
}
