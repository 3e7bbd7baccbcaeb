//! Single-shot strategy assembled from a repeated-game strategy, with exact and
//! Monte Carlo evaluation of how well it reproduces `P(W_i | W_C)`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corrsamp::{corr_sample_weights, qcs_execute, qcs_isometry, recommended_max_draws, CorrSampError, SharedRandomStream};
use crate::depbreak::{choose_c, context_wins, ChooseReport, CoordinateBundles, CoordinateSet, DepBreak, DepBreakBundle, DepBreakError};
use crate::games::{self, Game, GameError};
use crate::matcore::{local_expectation, tensor, CMatrix, DensityMatrix, MatError, PureState};
use crate::strategy::{self, born_joint, EntangledStrategy, StrategyError};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    DepBreak(#[from] DepBreakError),
    #[error(transparent)]
    CorrSamp(#[from] CorrSampError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Mat(#[from] MatError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassicalMode {
    /// Both players share one sample of `R_{-i}` from `P(R_{-i} | x_i, y_i, W_C)`; evaluated by enumeration.
    ExactConditional,
    /// Alice samples from `P(R_{-i} | x_i, W_C)` and Bob from `P(R_{-i} | y_i, W_C)` by correlated sampling.
    Holenstein,
    /// Both sample the joint conditional through correlated sampling (diagnostic).
    Joint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantumMode {
    /// Measure `Ψ_{r_A, x_i, y_i}` directly.
    OracleState,
    /// Prepare the state from an embezzlement resource with alignment isometries.
    Embezzle { d_prime: usize, alpha: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReductionConfig {
    /// Fixture name or path to a game file.
    pub game: String,
    /// Fixture name or path to a strategy file.
    pub strategy: String,
    pub n: usize,
    /// 0-based coordinates; `None` selects `C` by exhaustive search.
    pub c: Option<Vec<usize>>,
    pub eps: f64,
    pub t_max: Option<usize>,
    pub mode_classical: ClassicalMode,
    pub mode_quantum: QuantumMode,
    pub seed: u64,
    pub trials: usize,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        Self {
            game: "chsh".into(),
            strategy: "tsirelson".into(),
            n: 2,
            c: None,
            eps: 0.1,
            t_max: None,
            mode_classical: ClassicalMode::ExactConditional,
            mode_quantum: QuantumMode::OracleState,
            seed: 0,
            trials: 100_000,
        }
    }
}

pub fn resolve_game(name: &str) -> Result<Game, ReductionError> {
    match games::fixtures::by_name(name) {
        Some(g) => Ok(g),
        None if Path::new(name).exists() => Ok(games::load_game(Path::new(name))?),
        None => Err(ReductionError::Config(format!("unknown game '{name}'"))),
    }
}

pub fn resolve_strategy(name: &str, g: &Game, n: usize) -> Result<EntangledStrategy, ReductionError> {
    let s = match strategy::fixtures::by_name(name, g, n) {
        Some(s) => s?,
        None if Path::new(name).exists() => strategy::load_strategy(Path::new(name))?,
        None => return Err(ReductionError::Config(format!("unknown strategy '{name}'"))),
    };
    if s.n != n {
        return Err(ReductionError::Config(format!("strategy is for n = {}, requested n = {n}", s.n)));
    }
    s.check_game(g)?;
    Ok(s)
}

/// Per-coordinate sampling tables over `r = (ω_{-i}, a_C, b_C)`, flattened as
/// `(ω·|A_C| + a_C)·|B_C| + b_C`, for each `(x_i, y_i)`.
#[derive(Debug, Clone)]
struct Tables {
    joint: Vec<Vec<f64>>,
    alice: Vec<Vec<f64>>,
    bob: Vec<Vec<f64>>,
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
    v
}

fn tv(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// The single-shot strategy for `G`: bundles, sampling tables and the chosen modes.
#[derive(Debug, Clone)]
pub struct SingleShotStrategy {
    pub dep: DepBreak,
    pub mode_classical: ClassicalMode,
    pub mode_quantum: QuantumMode,
    tables: Vec<Tables>,
}

/// What one execution used, before measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Draw {
    pub slot: usize,
    pub x: usize,
    pub y: usize,
    pub r_a: Option<usize>,
    pub r_b: Option<usize>,
    pub exhausted: bool,
}

type PairKey = (usize, usize, usize, usize, usize);

#[derive(Debug, Clone)]
struct QcsResult {
    rho: DensityMatrix,
    err: f64,
    mismatch: f64,
}

impl SingleShotStrategy {
    pub fn universe(&self, slot: usize) -> usize {
        let cb = &self.dep.coords[slot];
        cb.omegas.len() * cb.nac * cb.nbc
    }

    fn bundle(&self, slot: usize, x: usize, y: usize, r: usize) -> Option<&DepBreakBundle> {
        let cb = &self.dep.coords[slot];
        let (w, rest) = (r / (cb.nac * cb.nbc), r % (cb.nac * cb.nbc));
        cb.get(w, x, y, rest / cb.nbc, rest % cb.nbc)
    }

    /// Sample the classical part of one execution.
    pub fn draw<R: Rng>(&self, rng: &mut R, stream: &mut SharedRandomStream, slot: usize, x: usize, y: usize) -> Draw {
        let t = &self.tables[slot];
        let q = x * self.dep.game.y_size() + y;
        let (pa, pb) = match self.mode_classical {
            ClassicalMode::ExactConditional => {
                let w = &t.joint[q];
                let r = WeightedIndex::new(w).ok().map(|d| d.sample(rng));
                return Draw { slot, x, y, r_a: r, r_b: r, exhausted: r.is_none() };
            }
            ClassicalMode::Holenstein => (&t.alice[q], &t.bob[q]),
            ClassicalMode::Joint => (&t.joint[q], &t.joint[q]),
        };
        let max = recommended_max_draws(pa, pb);
        match corr_sample_weights(pa, pb, stream, max) {
            Ok(s) => Draw { slot, x, y, r_a: s.p_out, r_b: s.q_out, exhausted: s.failed() },
            Err(_) => Draw { slot, x, y, r_a: None, r_b: None, exhausted: true },
        }
    }

    fn measure(&self, slot: usize, x: usize, y: usize, r_a: usize, r_b: usize) -> Option<(&[CMatrix], &[CMatrix])> {
        Some((self.bundle(slot, x, y, r_a)?.alice_povm(), self.bundle(slot, x, y, r_b)?.bob_povm()))
    }

    fn win_on_pure(&self, x: usize, y: usize, a: &[CMatrix], b: &[CMatrix], psi: &PureState) -> f64 {
        let g = &self.dep.game;
        let mut p = 0.0;
        for (ai, ea) in a.iter().enumerate() {
            for (bi, eb) in b.iter().enumerate() {
                // The trailing null outcome answers 0.
                let (aa, bb) = (if ai == g.a_size() { 0 } else { ai }, if bi == g.b_size() { 0 } else { bi });
                if g.wins(x, y, aa, bb) {
                    p += local_expectation(ea, eb, psi.as_vector()).map_or(0.0, |z| z.re);
                }
            }
        }
        p.clamp(0.0, 1.0)
    }

    fn win_on_mixed(&self, x: usize, y: usize, a: &[CMatrix], b: &[CMatrix], rho: &DensityMatrix) -> f64 {
        let g = &self.dep.game;
        let m = rho.as_matrix();
        let mut p = 0.0;
        for (ai, ea) in a.iter().enumerate() {
            for (bi, eb) in b.iter().enumerate() {
                let (aa, bb) = (if ai == g.a_size() { 0 } else { ai }, if bi == g.b_size() { 0 } else { bi });
                if g.wins(x, y, aa, bb) {
                    p += tensor(ea, eb).iter().zip(m.iter()).map(|(u, v)| (u.conj() * v).re).sum::<f64>();
                }
            }
        }
        p.clamp(0.0, 1.0)
    }

    fn default_win(&self, x: usize, y: usize) -> f64 {
        if self.dep.game.wins(x, y, 0, 0) {
            1.0
        } else {
            0.0
        }
    }

    fn pair_key(d: &Draw) -> Option<PairKey> {
        Some((d.slot, d.x, d.y, d.r_a?, d.r_b?))
    }

    fn qcs_for(&self, key: PairKey, d_prime: usize, alpha: f64) -> Result<Option<QcsResult>, ReductionError> {
        let (slot, x, y, ra, rb) = key;
        let (Some(ba), Some(bb)) = (self.bundle(slot, x, y, ra), self.bundle(slot, x, y, rb)) else { return Ok(None) };
        let (Some(sa), Some(sb)) = (&ba.alice_fixed.state, &bb.bob_fixed.state) else { return Ok(None) };
        let d = self.dep.strategy.d;
        let iso_a = qcs_isometry(sa, d_prime, alpha)?;
        let iso_b = qcs_isometry(sb, d_prime, alpha)?;
        let out = qcs_execute(&iso_a, &iso_b, d)?;
        let mismatch = match &ba.main.state {
            Some(m) => (m.as_vector() - sa.as_vector()).norm(),
            None => 1.0,
        };
        Ok(Some(QcsResult { rho: out.produced_target, err: out.err, mismatch }))
    }

    fn qcs_table(&self, keys: BTreeSet<PairKey>) -> Result<BTreeMap<PairKey, Option<QcsResult>>, ReductionError> {
        let QuantumMode::Embezzle { d_prime, alpha } = self.mode_quantum else { return Ok(BTreeMap::new()) };
        let keys: Vec<PairKey> = keys.into_iter().collect();
        let vals: Vec<Option<QcsResult>> = keys.par_iter().map(|&k| self.qcs_for(k, d_prime, alpha)).collect::<Result<_, _>>()?;
        Ok(keys.into_iter().zip(vals).collect())
    }

    /// Conditional win probability of one draw, and its embezzlement error terms if any.
    fn evaluate(&self, d: &Draw, qcs: &BTreeMap<PairKey, Option<QcsResult>>) -> Evaluated {
        let Some(key) = Self::pair_key(d) else {
            return Evaluated { win: self.default_win(d.x, d.y), absent: true, qcs: None };
        };
        let (slot, x, y, ra, rb) = key;
        let Some((a, b)) = self.measure(slot, x, y, ra, rb) else {
            return Evaluated { win: self.default_win(x, y), absent: true, qcs: None };
        };
        match self.mode_quantum {
            QuantumMode::OracleState => match self.bundle(slot, x, y, ra).and_then(|bd| bd.main.state.as_ref()) {
                Some(psi) => Evaluated { win: self.win_on_pure(x, y, a, b, psi), absent: false, qcs: None },
                None => Evaluated { win: self.default_win(x, y), absent: true, qcs: None },
            },
            QuantumMode::Embezzle { .. } => match qcs.get(&key).and_then(|r| r.as_ref()) {
                Some(r) => Evaluated { win: self.win_on_mixed(x, y, a, b, &r.rho), absent: false, qcs: Some((r.err, r.mismatch)) },
                None => Evaluated { win: self.default_win(x, y), absent: true, qcs: None },
            },
        }
    }
}

struct Evaluated {
    win: f64,
    absent: bool,
    qcs: Option<(f64, f64)>,
}

/// Assemble bundles and sampling tables for `(g, s)` on the coordinate set `set`.
pub fn build_single_shot(
    g: &Game,
    s: &EntangledStrategy,
    set: CoordinateSet,
    mode_classical: ClassicalMode,
    mode_quantum: QuantumMode,
) -> Result<SingleShotStrategy, ReductionError> {
    if let QuantumMode::Embezzle { d_prime, alpha } = mode_quantum {
        if d_prime == 0 || !(alpha > 0.0) {
            return Err(ReductionError::Config(format!("embezzle parameters d' = {d_prime}, alpha = {alpha}")));
        }
    }
    let dep = DepBreak::build(g, s, set)?;
    let tables = dep.coords.iter().map(|cb| tables_for(g, &dep.set, cb)).collect();
    Ok(SingleShotStrategy { dep, mode_classical, mode_quantum, tables })
}

fn tables_for(g: &Game, set: &CoordinateSet, cb: &CoordinateBundles) -> Tables {
    let (nx, ny) = (g.x_size(), g.y_size());
    let u = cb.omegas.len() * cb.nac * cb.nbc;
    let mut t = Tables { joint: vec![vec![0.0; u]; nx * ny], alice: vec![vec![0.0; u]; nx * ny], bob: vec![vec![0.0; u]; nx * ny] };
    for b in cb.iter() {
        let (om, p) = &cb.omegas[b.omega];
        if !context_wins(g, set, om, b.a_c, b.b_c) {
            continue;
        }
        let q = b.x * ny + b.y;
        let r = (b.omega * cb.nac + b.a_c) * cb.nbc + b.b_c;
        t.joint[q][r] = p * b.main.weight;
        t.alice[q][r] = p * b.alice_fixed.weight;
        t.bob[q][r] = p * b.bob_fixed.weight;
    }
    for v in [&mut t.joint, &mut t.alice, &mut t.bob] {
        for row in v.iter_mut() {
            *row = normalize(std::mem::take(row));
        }
    }
    t
}

#[derive(Debug, Clone, Serialize)]
pub struct CoordinateResult {
    /// 1-based.
    pub coordinate: usize,
    pub p_tilde: f64,
    pub p_target: f64,
    pub residual: f64,
    pub stderr: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct FailureCounts {
    pub exhausted_draws: usize,
    pub absent_states: usize,
    pub disagreements: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct QcsStats {
    pub d_prime: usize,
    pub alpha: f64,
    pub distinct_pairs: usize,
    pub avg_err: f64,
    pub max_err: f64,
    pub avg_target_mismatch: f64,
}

/// Measured error terms; `total` bounds `|E_i P̃(W_i) − E_i P(W_i | W_C)|`.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorBudget {
    /// `E TV(P_{R_{-i}|x_i,W_C}, P_{R_{-i}|x_i,y_i,W_C})` for the distribution Alice samples from.
    pub skew_tv: f64,
    pub disagreement: f64,
    /// Average of embezzlement error plus `‖Ψ_{r,x} − Ψ_{r,x,y}‖`.
    pub qcs: f64,
    pub three_stderr: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReductionReport {
    pub version: String,
    pub config: ReductionConfig,
    /// 1-based.
    pub c: Vec<usize>,
    pub choose: Option<ChooseReport>,
    pub p_wc: f64,
    pub per_coordinate: Vec<CoordinateResult>,
    pub avg_p_tilde: f64,
    pub avg_p_target: f64,
    pub avg_residual: f64,
    pub stderr: f64,
    pub exact: bool,
    pub failures: FailureCounts,
    pub qcs: Option<QcsStats>,
    pub budget: ErrorBudget,
    pub within_budget: bool,
    pub threshold: f64,
    pub target_meets_threshold: bool,
}

/// `P(W_i | W_C)` for each free coordinate, straight from the Born table.
pub fn target_conditionals(g: &Game, s: &EntangledStrategy, set: &CoordinateSet) -> Result<(f64, Vec<f64>), ReductionError> {
    let n = set.n;
    let born = born_joint(g, n, s)?;
    let mut p_wc = 0.0;
    let mut joint = vec![0.0; set.m()];
    born.for_each(|a, w| {
        let win = |i: usize| g.wins(a[i], a[n + i], a[2 * n + i], a[3 * n + i]);
        if w > 0.0 && set.c.iter().all(|&c| win(c)) {
            p_wc += w;
            for (slot, &i) in set.free.iter().enumerate() {
                if win(i) {
                    joint[slot] += w;
                }
            }
        }
    });
    if p_wc <= 0.0 {
        return Err(DepBreakError::ZeroWinProbability.into());
    }
    Ok((p_wc, joint.iter().map(|j| j / p_wc).collect()))
}

pub fn run_reduction(cfg: &ReductionConfig) -> Result<ReductionReport, ReductionError> {
    let g = resolve_game(&cfg.game)?;
    let s = resolve_strategy(&cfg.strategy, &g, cfg.n)?;
    run_reduction_with(cfg, &g, &s)
}

pub fn run_reduction_with(cfg: &ReductionConfig, g: &Game, s: &EntangledStrategy) -> Result<ReductionReport, ReductionError> {
    let n = cfg.n;
    if n == 0 {
        return Err(ReductionError::Config("n must be positive".into()));
    }
    let (c, choose) = match &cfg.c {
        Some(c) => (c.clone(), None),
        None => {
            let born = born_joint(g, n, s)?;
            let rep = choose_c(&born, g, n, cfg.eps, cfg.t_max.unwrap_or(n - 1))?;
            (rep.c.clone(), Some(rep))
        }
    };
    let set = CoordinateSet::new(n, c)?;
    let (p_wc, targets) = target_conditionals(g, s, &set)?;
    let ss = build_single_shot(g, s, set.clone(), cfg.mode_classical, cfg.mode_quantum)?;
    let m = set.m();
    let (nx, ny) = (g.x_size(), g.y_size());

    let mut skew = 0.0;
    for t in &ss.tables {
        for x in 0..nx {
            for y in 0..ny {
                let q = x * ny + y;
                let alt = match cfg.mode_classical {
                    ClassicalMode::Holenstein => &t.alice[q],
                    _ => &t.joint[q],
                };
                skew += g.mu(x, y) * tv(alt, &t.joint[q]) / m as f64;
            }
        }
    }

    let mut failures = FailureCounts::default();
    let exact = cfg.mode_classical == ClassicalMode::ExactConditional;
    let mut per_win = vec![Vec::<(f64, f64)>::new(); m];
    let mut qcs_terms: Vec<(f64, f64, f64)> = Vec::new();
    let qcs_pairs;
    let weights_total;
    if exact {
        // Enumerate (i, x, y, r) with their exact probabilities.
        let mut draws = Vec::new();
        for slot in 0..m {
            for x in 0..nx {
                for y in 0..ny {
                    if g.mu(x, y) <= 0.0 {
                        continue;
                    }
                    let row = &ss.tables[slot].joint[x * ny + y];
                    if row.iter().all(|&w| w == 0.0) {
                        failures.exhausted_draws += 1;
                        draws.push((g.mu(x, y), Draw { slot, x, y, r_a: None, r_b: None, exhausted: true }));
                    }
                    for (r, &w) in row.iter().enumerate() {
                        if w > 0.0 {
                            draws.push((g.mu(x, y) * w, Draw { slot, x, y, r_a: Some(r), r_b: Some(r), exhausted: false }));
                        }
                    }
                }
            }
        }
        let keys: BTreeSet<PairKey> = draws.iter().filter_map(|(_, d)| SingleShotStrategy::pair_key(d)).collect();
        let table = ss.qcs_table(keys)?;
        qcs_pairs = table.len();
        for (w, d) in &draws {
            let e = ss.evaluate(d, &table);
            failures.absent_states += usize::from(e.absent && !d.exhausted);
            per_win[d.slot].push((*w, e.win));
            if let Some(q) = e.qcs {
                qcs_terms.push((*w / m as f64, q.0, q.1));
            }
        }
        weights_total = 1.0;
    } else {
        if cfg.trials == 0 {
            return Err(ReductionError::Config("trials must be at least 1".into()));
        }
        let mu = WeightedIndex::new(g.mu_table().weights()).map_err(|e| ReductionError::Config(e.to_string()))?;
        let draws: Vec<Draw> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(2 * t as u64);
                let slot = rng.gen_range(0..m);
                let q = mu.sample(&mut rng);
                let (x, y) = (q / ny, q % ny);
                let mut stream = SharedRandomStream::new(cfg.seed, 2 * t as u64 + 1, ss.universe(slot));
                ss.draw(&mut rng, &mut stream, slot, x, y)
            })
            .collect();
        let keys: BTreeSet<PairKey> = draws.iter().filter_map(SingleShotStrategy::pair_key).collect();
        let table = ss.qcs_table(keys)?;
        qcs_pairs = table.len();
        let evals: Vec<Evaluated> = draws.par_iter().map(|d| ss.evaluate(d, &table)).collect();
        for (d, e) in draws.iter().zip(&evals) {
            failures.exhausted_draws += usize::from(d.exhausted);
            failures.disagreements += usize::from(d.exhausted || d.r_a != d.r_b);
            failures.absent_states += usize::from(e.absent && !d.exhausted);
            per_win[d.slot].push((1.0, e.win));
            if let Some(q) = e.qcs {
                qcs_terms.push((1.0 / cfg.trials as f64, q.0, q.1));
            }
        }
        weights_total = cfg.trials as f64;
    }

    let mut per_coordinate = Vec::with_capacity(m);
    for (slot, &i) in set.free.iter().enumerate() {
        let rows = &per_win[slot];
        let (p_tilde, stderr) = if exact {
            (rows.iter().map(|(w, v)| w * v).sum::<f64>(), 0.0)
        } else {
            let k = rows.len().max(1) as f64;
            let mean = rows.iter().map(|r| r.1).sum::<f64>() / k;
            let var = if rows.len() > 1 { rows.iter().map(|r| (r.1 - mean).powi(2)).sum::<f64>() / (k - 1.0) } else { 0.0 };
            (mean, (var / k).sqrt())
        };
        per_coordinate.push(CoordinateResult {
            coordinate: i + 1,
            p_tilde,
            p_target: targets[slot],
            residual: (p_tilde - targets[slot]).abs(),
            stderr,
            trials: rows.len(),
        });
    }
    let mf = m as f64;
    let avg_p_tilde = per_coordinate.iter().map(|c| c.p_tilde).sum::<f64>() / mf;
    let avg_p_target = per_coordinate.iter().map(|c| c.p_target).sum::<f64>() / mf;
    let stderr = per_coordinate.iter().map(|c| c.stderr * c.stderr).sum::<f64>().sqrt() / mf;
    let avg_residual = (avg_p_tilde - avg_p_target).abs();

    let disagreement = failures.disagreements as f64 / weights_total;
    let three_stderr = 3.0 * stderr;
    let qcs_stats = match cfg.mode_quantum {
        QuantumMode::Embezzle { d_prime, alpha } => {
            let mass: f64 = qcs_terms.iter().map(|t| t.0).sum();
            let avg = |f: fn(&(f64, f64, f64)) -> f64| if mass > 0.0 { qcs_terms.iter().map(|t| t.0 * f(t)).sum::<f64>() / mass } else { 0.0 };
            Some(QcsStats {
                d_prime,
                alpha,
                distinct_pairs: qcs_pairs,
                avg_err: avg(|t| t.1),
                max_err: qcs_terms.iter().map(|t| t.1).fold(0.0, f64::max),
                avg_target_mismatch: avg(|t| t.2),
            })
        }
        QuantumMode::OracleState => None,
    };
    // Executions without a prepared state carry no term here; they only arise off the
    // support of the joint conditional, which the skew term already covers.
    let qcs_budget: f64 = qcs_terms.iter().map(|t| t.0 * (t.1 + t.2)).sum();
    let total = skew + disagreement + qcs_budget + three_stderr;
    let threshold = 1.0 - cfg.eps / 2.0;
    Ok(ReductionReport {
        version: VERSION.into(),
        config: cfg.clone(),
        c: set.public(),
        choose,
        p_wc,
        per_coordinate,
        avg_p_tilde,
        avg_p_target,
        avg_residual,
        stderr,
        exact,
        failures,
        qcs: qcs_stats,
        budget: ErrorBudget { skew_tv: skew, disagreement, qcs: qcs_budget, three_stderr, total },
        within_budget: avg_residual <= total + 1e-8,
        threshold,
        target_meets_threshold: avg_p_target >= threshold,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundComparison {
    /// `E_i P̃(W_i) − (E_i P(W_i | W_C) − claimed)` with `claimed` the budget without its statistical part.
    pub margin: f64,
    /// Whether the margin is at least `−3·stderr`.
    pub pass_threshold: bool,
    /// Whether the claimed error is within `ε/4`.
    pub claimed_within_quarter_eps: bool,
    /// Whether `E_i P̃(W_i) ≥ 1 − 3ε/4`.
    pub beats_three_quarter_eps: bool,
}

pub fn main_bound_compare(report: &ReductionReport, eps: f64) -> BoundComparison {
    let b = &report.budget;
    let claimed = b.skew_tv + b.disagreement + b.qcs;
    let margin = report.avg_p_tilde - (report.avg_p_target - claimed);
    BoundComparison {
        margin,
        pass_threshold: margin >= -b.three_stderr - 1e-12,
        claimed_within_quarter_eps: claimed <= eps / 4.0,
        beats_three_quarter_eps: report.avg_p_tilde >= 1.0 - 0.75 * eps,
    }
}

/// Per-coordinate table with columns `coordinate, p_tilde, p_target, residual, stderr, trials`.
pub fn report_csv(report: &ReductionReport) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &report.per_coordinate {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
