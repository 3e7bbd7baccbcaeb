//! Game values: exact classical value, seesaw lower bounds on the entangled value,
//! and the parallel repetition bound calculator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::games::Game;
use crate::matcore::{self, random, CMatrix, MatError, PureState};
use crate::strategy::{wins_all, DeterministicStrategy, EntangledStrategy, PovmFamily, StrategyError};

/// Cap on the number of deterministic strategy pairs for the classical value.
pub const MAX_CLASSICAL_PAIRS: u128 = 100_000_000;

#[derive(Debug, Error)]
pub enum ValuesError {
    #[error("classical search over {0} strategy pairs exceeds the limit {MAX_CLASSICAL_PAIRS}")]
    TooLarge(u128),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

#[derive(Debug, Clone)]
pub struct ClassicalValue {
    pub value: f64,
    pub strategy: DeterministicStrategy,
}

pub fn classical_pairs(g: &Game, n: usize) -> u128 {
    let (xs, ys) = (g.alice_tuples(n).count() as u32, g.bob_tuples(n).count() as u32);
    let (na, nb) = (g.alice_answers(n).count() as u128, g.bob_answers(n).count() as u128);
    na.saturating_pow(xs).saturating_mul(nb.saturating_pow(ys))
}

/// Exact classical value of `G^n` by enumerating Alice's answer functions and
/// letting Bob best-respond question by question.
pub fn classical_value(g: &Game, n: usize) -> Result<ClassicalValue, ValuesError> {
    let pairs = classical_pairs(g, n);
    if pairs > MAX_CLASSICAL_PAIRS {
        return Err(ValuesError::TooLarge(pairs));
    }
    let (xs, ys) = (g.alice_tuples(n), g.bob_tuples(n));
    let (nx, ny) = (xs.count(), ys.count());
    let (na, nb) = (g.alice_answers(n).count(), g.bob_answers(n).count());
    let qw: Vec<f64> =
        (0..nx * ny).map(|k| crate::strategy::question_weight(g, &xs, &ys, k / ny, k % ny)).collect();
    let alice_count = na.pow(nx as u32);
    let best = (0..alice_count)
        .into_par_iter()
        .map(|code| {
            let f = crate::games::Radix::new(na, nx).decode(code);
            let mut value = 0.0;
            let mut bob = vec![0; ny];
            for yi in 0..ny {
                let mut best_b = (f64::NEG_INFINITY, 0);
                for bi in 0..nb {
                    let v: f64 = (0..nx).filter(|&xi| wins_all(g, n, xi, yi, f[xi], bi)).map(|xi| qw[xi * ny + yi]).sum();
                    if v > best_b.0 {
                        best_b = (v, bi);
                    }
                }
                value += best_b.0;
                bob[yi] = best_b.1;
            }
            (value, code, f, bob)
        })
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX, vec![], vec![]),
            |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a },
        );
    Ok(ClassicalValue { value: best.0, strategy: DeterministicStrategy { n, alice: best.2, bob: best.3 } })
}

/// `Σ_{x,y} μ(x,y) Σ_{a,b: V=1} A_x^a ⊗ B_y^b` for a single-round game.
pub fn bell_operator(g: &Game, alice: &PovmFamily, bob: &PovmFamily) -> Result<CMatrix, ValuesError> {
    if alice.questions() != g.x_size() || bob.questions() != g.y_size() {
        return Err(ValuesError::InvalidArgument("POVM families do not match the game's questions".into()));
    }
    let d = alice.d();
    let mut w = CMatrix::zeros(d * d, d * d);
    for x in 0..g.x_size() {
        for y in 0..g.y_size() {
            let mu = g.mu(x, y);
            if mu == 0.0 {
                continue;
            }
            for a in 0..g.a_size() {
                let mut bsum = CMatrix::zeros(d, d);
                for b in 0..g.b_size() {
                    if g.wins(x, y, a, b) {
                        bsum += bob.element(y, b);
                    }
                }
                w += matcore::tensor(alice.element(x, a), &bsum).scale(mu);
            }
        }
    }
    Ok(w)
}

#[derive(Debug, Clone, Serialize)]
pub struct SeesawConfig {
    pub d: usize,
    pub max_iters: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        Self { d: 2, max_iters: 500, seed: 0, tol: 1e-13 }
    }
}

#[derive(Debug, Clone)]
pub struct SeesawResult {
    pub value: f64,
    pub strategy: EntangledStrategy,
    /// Objective after each iteration (state update followed by both measurement updates).
    pub history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn random_povm<R: Rng>(d: usize, answers: usize, rng: &mut R) -> Vec<CMatrix> {
    let raw: Vec<CMatrix> = (0..answers).map(|_| random::psd(d, 1, rng)).collect();
    let total = raw.iter().fold(CMatrix::zeros(d, d), |acc, e| acc + e);
    let inv = matcore::pinv(&matcore::mat_sqrt(&total).expect("PSD"), 1e-14);
    let mut out: Vec<CMatrix> = raw.iter().map(|e| matcore::hermitize(&(&inv * e * &inv))).collect();
    // Any deficit from a rank-deficient total goes to the first outcome.
    let sum = out.iter().fold(CMatrix::zeros(d, d), |acc, e| acc + e);
    out[0] += matcore::identity(d) - sum;
    out
}

/// Raise `Σ_a Tr(E_a K_a)` by optimally re-splitting pairs of effects until no pair improves.
fn improve_povm(povm: &mut [CMatrix], k: &[CMatrix]) -> Result<(), MatError> {
    let m = povm.len();
    for _sweep in 0..200 {
        let mut improved = false;
        for a in 0..m {
            for b in a + 1..m {
                let e = &povm[a] + &povm[b];
                let r = matcore::mat_sqrt(&e)?;
                let h = matcore::hermitize(&(&r * (&k[a] - &k[b]) * &r));
                let eig = matcore::eigh(&h)?;
                let p = eig.reconstruct_with(|v| if v > 0.0 { 1.0 } else { 0.0 });
                let new_a = matcore::hermitize(&(&r * p * &r));
                let new_b = &e - &new_a;
                let old = (&povm[a] * &k[a]).trace().re + (&povm[b] * &k[b]).trace().re;
                let new = (&new_a * &k[a]).trace().re + (&new_b * &k[b]).trace().re;
                if new > old {
                    if new - old > 1e-14 {
                        improved = true;
                    }
                    povm[a] = new_a;
                    povm[b] = new_b;
                }
            }
        }
        if !improved {
            break;
        }
    }
    Ok(())
}

fn top_eigenvector(w: &CMatrix) -> Result<(f64, PureState), MatError> {
    let e = matcore::eigh(w)?;
    let v = e.vectors.column(0).into_owned();
    Ok((e.values[0], PureState::normalized(v)?))
}

fn expectation(w: &CMatrix, psi: &PureState) -> f64 {
    psi.as_vector().dotc(&(w * psi.as_vector())).re
}

/// Alternating optimization over the state and both players' measurements.
pub fn seesaw(g: &Game, cfg: &SeesawConfig) -> Result<SeesawResult, ValuesError> {
    let d = cfg.d;
    if d == 0 {
        return Err(ValuesError::InvalidArgument("d must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut alice: Vec<Vec<CMatrix>> = (0..g.x_size()).map(|_| random_povm(d, g.a_size(), &mut rng)).collect();
    let mut bob: Vec<Vec<CMatrix>> = (0..g.y_size()).map(|_| random_povm(d, g.b_size(), &mut rng)).collect();
    let mut history = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    let fam = |f: &Vec<Vec<CMatrix>>| PovmFamily::new(d, f.clone());
    for _ in 0..cfg.max_iters {
        iterations += 1;
        let w = bell_operator(g, &fam(&alice)?, &fam(&bob)?)?;
        let (_, psi) = top_eigenvector(&w)?;
        let m = psi.coefficient_matrix(d, d)?;
        let md = m.adjoint();
        for x in 0..g.x_size() {
            let k: Vec<CMatrix> = (0..g.a_size())
                .map(|a| {
                    let mut s = CMatrix::zeros(d, d);
                    for y in 0..g.y_size() {
                        for b in 0..g.b_size() {
                            if g.wins(x, y, a, b) {
                                s += bob[y][b].scale(g.mu(x, y));
                            }
                        }
                    }
                    matcore::hermitize(&(&m * s.transpose() * &md))
                })
                .collect();
            improve_povm(&mut alice[x], &k)?;
        }
        let mt = m.transpose();
        let mc = m.map(|z| z.conj());
        for y in 0..g.y_size() {
            let k: Vec<CMatrix> = (0..g.b_size())
                .map(|b| {
                    let mut s = CMatrix::zeros(d, d);
                    for x in 0..g.x_size() {
                        for a in 0..g.a_size() {
                            if g.wins(x, y, a, b) {
                                s += alice[x][a].scale(g.mu(x, y));
                            }
                        }
                    }
                    matcore::hermitize(&(&mt * s.transpose() * &mc))
                })
                .collect();
            improve_povm(&mut bob[y], &k)?;
        }
        let w = bell_operator(g, &fam(&alice)?, &fam(&bob)?)?;
        let v = expectation(&w, &psi);
        history.push(v);
        if v - prev < cfg.tol {
            converged = true;
            break;
        }
        prev = v;
    }
    let (alice, bob) = (fam(&alice)?, fam(&bob)?);
    let w = bell_operator(g, &alice, &bob)?;
    let (value, psi) = top_eigenvector(&w)?;
    history.push(value);
    let strategy = EntangledStrategy::new(d, 1, psi, alice, bob)?;
    Ok(SeesawResult { value, strategy, history, iterations, converged })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LogBase {
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "e")]
    Natural,
}

impl LogBase {
    fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Two => x.log2(),
            LogBase::Natural => x.ln(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub epsilon: f64,
    pub s_bits: f64,
    pub n: u128,
    pub c: f64,
    pub log_base: LogBase,
    /// `c · s · log n / (ε^17 · n^{1/4})` before clamping.
    pub raw: f64,
    pub bound_value: f64,
    pub vacuous: bool,
}

/// Upper bound on the entangled value of `G^n` for a game of value `1 − ε` with
/// `s` answer bits, `min(1, c·s·log n / (ε^17 n^{1/4}))`.
pub fn repetition_bound(epsilon: f64, s_bits: f64, n: u128, c: f64, log_base: LogBase) -> Result<BoundReport, ValuesError> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(ValuesError::InvalidArgument(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    if !(s_bits >= 0.0 && s_bits.is_finite()) {
        return Err(ValuesError::InvalidArgument(format!("s must be a nonnegative number, got {s_bits}")));
    }
    if n < 2 {
        return Err(ValuesError::InvalidArgument(format!("n must be at least 2, got {n}")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(ValuesError::InvalidArgument(format!("c must be positive, got {c}")));
    }
    let nf = n as f64;
    let raw = c * s_bits * log_base.log(nf) / (epsilon.powi(17) * nf.sqrt().sqrt());
    Ok(BoundReport { epsilon, s_bits, n, c, log_base, raw, bound_value: raw.min(1.0), vacuous: raw >= 1.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::fixtures::{chsh, trivial};
    use crate::strategy::{fixtures::tsirelson, win_probability};

    #[test]
    fn chsh_classical() {
        assert_eq!(classical_value(&chsh(), 1).unwrap().value, 0.75);
        assert_eq!(classical_value(&trivial(), 1).unwrap().value, 1.0);
    }

    #[test]
    fn bell_operator_reproduces_win_probability() {
        let g = chsh();
        let s = tsirelson(1);
        let w = bell_operator(&g, &s.alice, &s.bob).unwrap();
        let v = expectation(&w, &s.psi);
        assert!((v - win_probability(&g, 1, &s).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn seesaw_history_monotone() {
        let r = seesaw(&chsh(), &SeesawConfig { seed: 3, ..Default::default() }).unwrap();
        for w in r.history.windows(2) {
            assert!(w[1] >= w[0] - 1e-10);
        }
        assert!((r.value - win_probability(&chsh(), 1, &r.strategy).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn bound_examples() {
        let r = repetition_bound(0.25, 2.0, 1u128 << 40, 1.0, LogBase::Two).unwrap();
        assert_eq!(r.raw, 80.0 * (1u64 << 24) as f64);
        assert!(r.vacuous);
        assert_eq!(r.bound_value, 1.0);
        let r = repetition_bound(1.0, 1.0, 1u128 << 64, 1.0, LogBase::Two).unwrap();
        assert_eq!(r.raw, 64.0 / 65536.0);
        assert!(!r.vacuous);
        assert!(repetition_bound(0.0, 1.0, 4, 1.0, LogBase::Two).is_err());
    }
}
