//! Entangled and deterministic strategies for repeated games.
//!
//! An entangled strategy for `G^n` holds a pure state on `C^d ⊗ C^d` and one
//! POVM per question tuple, indexed `[question tuple][answer tuple]`.

use std::fmt::Write as _;

use rand::Rng;
use thiserror::Error;

use crate::games::{Game, Radix};
use crate::matcore::{self, c, identity, random, CMatrix, CVector, MatError, PureState};
use crate::prob::{FiniteDistribution, ProbError};

pub const POVM_TOL: f64 = 1e-8;
/// Cap on the number of entries of a Born table.
pub const MAX_BORN_ENTRIES: usize = 10_000_000;

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
    #[error("strategy does not fit the game: {0}")]
    Mismatch(String),
    #[error("Born table would have {0} entries (limit {MAX_BORN_ENTRIES})")]
    TooLarge(u128),
    #[error("strategy file: {0}")]
    Parse(String),
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Measurements indexed by question, each a list of effects indexed by answer.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmFamily {
    d: usize,
    elements: Vec<Vec<CMatrix>>,
}

impl PovmFamily {
    pub fn new(d: usize, elements: Vec<Vec<CMatrix>>) -> Result<Self, StrategyError> {
        for (q, povm) in elements.iter().enumerate() {
            if povm.is_empty() {
                return Err(StrategyError::InvalidPovm(format!("question {q} has no outcomes")));
            }
            let mut total = CMatrix::zeros(d, d);
            for (a, e) in povm.iter().enumerate() {
                if e.shape() != (d, d) {
                    return Err(StrategyError::InvalidPovm(format!("effect ({q},{a}) has shape {:?}", e.shape())));
                }
                let lo = matcore::min_eigenvalue(e)?;
                if lo < -POVM_TOL {
                    return Err(StrategyError::InvalidPovm(format!("effect ({q},{a}) has eigenvalue {lo:e}")));
                }
                total += e;
            }
            let dev = matcore::frobenius(&(total - identity(d)));
            if dev > POVM_TOL {
                return Err(StrategyError::InvalidPovm(format!("question {q} sums to I up to {dev:e}")));
            }
        }
        if elements.iter().any(|p| p.len() != elements[0].len()) {
            return Err(StrategyError::InvalidPovm("questions have different outcome counts".into()));
        }
        Ok(Self { d, elements })
    }

    pub fn d(&self) -> usize {
        self.d
    }
    pub fn questions(&self) -> usize {
        self.elements.len()
    }
    pub fn answers(&self) -> usize {
        self.elements.first().map_or(0, |p| p.len())
    }
    pub fn element(&self, q: usize, a: usize) -> &CMatrix {
        &self.elements[q][a]
    }
    pub fn povm(&self, q: usize) -> &[CMatrix] {
        &self.elements[q]
    }

    pub fn conjugated(&self, u: &CMatrix) -> Self {
        let ud = u.adjoint();
        let elements = self.elements.iter().map(|p| p.iter().map(|e| u * e * &ud).collect()).collect();
        Self { d: self.d, elements }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntangledStrategy {
    pub d: usize,
    pub n: usize,
    pub psi: PureState,
    pub alice: PovmFamily,
    pub bob: PovmFamily,
}

impl EntangledStrategy {
    pub fn new(d: usize, n: usize, psi: PureState, alice: PovmFamily, bob: PovmFamily) -> Result<Self, StrategyError> {
        if psi.dim() != d * d {
            return Err(StrategyError::Mismatch(format!("state has dimension {}, expected {}", psi.dim(), d * d)));
        }
        if alice.d() != d || bob.d() != d {
            return Err(StrategyError::Mismatch("POVM dimension differs from the state".into()));
        }
        Ok(Self { d, n, psi, alice, bob })
    }

    /// Coefficient matrix `M` with `ψ = Σ M_ij |i⟩|j⟩`.
    pub fn state_matrix(&self) -> CMatrix {
        self.psi.coefficient_matrix(self.d, self.d).expect("state dimension checked at construction")
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let m = self.state_matrix();
        matcore::frobenius(&(&m - m.transpose())) <= tol
    }

    /// Reduced state on Alice's side (equal to Bob's for symmetric states).
    pub fn reduced_state(&self) -> CMatrix {
        let m = self.state_matrix();
        &m * m.adjoint()
    }

    pub fn check_game(&self, g: &Game) -> Result<(), StrategyError> {
        let n = self.n;
        let want = [
            ("Alice questions", self.alice.questions(), g.alice_tuples(n).count()),
            ("Alice answers", self.alice.answers(), g.alice_answers(n).count()),
            ("Bob questions", self.bob.questions(), g.bob_tuples(n).count()),
            ("Bob answers", self.bob.answers(), g.bob_answers(n).count()),
        ];
        for (what, got, exp) in want {
            if got != exp {
                return Err(StrategyError::Mismatch(format!("{what}: {got}, expected {exp}")));
            }
        }
        Ok(())
    }

    /// `P(a, b | x, y)` as a dense `|A|^n × |B|^n` row-major table.
    pub fn answer_table(&self, x: usize, y: usize) -> Vec<f64> {
        let m = self.state_matrix();
        let md = m.adjoint();
        let (na, nb) = (self.alice.answers(), self.bob.answers());
        let mut out = vec![0.0; na * nb];
        for a in 0..na {
            let k = &md * self.alice.element(x, a) * &m;
            for b in 0..nb {
                out[a * nb + b] = pairing(&k, self.bob.element(y, b));
            }
        }
        out
    }
}

/// `Σ_ij K_ij B_ij`, which equals `Tr(K Bᵀ)`.
fn pairing(k: &CMatrix, b: &CMatrix) -> f64 {
    k.iter().zip(b.iter()).map(|(x, y)| (x * y).re).sum()
}

/// Answer functions on question tuples (indices into the tuple encodings).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicStrategy {
    pub n: usize,
    pub alice: Vec<usize>,
    pub bob: Vec<usize>,
}

impl DeterministicStrategy {
    /// Embed as commuting projective measurements on `C^1`.
    pub fn to_entangled(&self, g: &Game) -> Result<EntangledStrategy, StrategyError> {
        let (na, nb) = (g.alice_answers(self.n).count(), g.bob_answers(self.n).count());
        let proj = |count: usize, pick: usize| -> Vec<CMatrix> {
            (0..count).map(|a| CMatrix::from_element(1, 1, c(if a == pick { 1.0 } else { 0.0 }, 0.0))).collect()
        };
        let alice = PovmFamily::new(1, self.alice.iter().map(|&a| proj(na, a)).collect())?;
        let bob = PovmFamily::new(1, self.bob.iter().map(|&b| proj(nb, b)).collect())?;
        let s = EntangledStrategy::new(1, self.n, PureState::basis(1, 0), alice, bob)?;
        s.check_game(g)?;
        Ok(s)
    }
}

#[derive(Debug, Clone, Copy)]
pub enum StrategyRef<'a> {
    Entangled(&'a EntangledStrategy),
    Deterministic(&'a DeterministicStrategy),
}

impl<'a> From<&'a EntangledStrategy> for StrategyRef<'a> {
    fn from(s: &'a EntangledStrategy) -> Self {
        Self::Entangled(s)
    }
}

impl<'a> From<&'a DeterministicStrategy> for StrategyRef<'a> {
    fn from(s: &'a DeterministicStrategy) -> Self {
        Self::Deterministic(s)
    }
}

/// Rotate Bob's side so the state becomes `Σ_k σ_k |l_k⟩|l_k⟩`, conjugating his
/// POVMs to keep every correlation `P(a,b|x,y)` unchanged.
pub fn symmetrize(s: &EntangledStrategy) -> Result<EntangledStrategy, StrategyError> {
    let d = s.d;
    let sd = matcore::schmidt(&s.psi, d, d)?;
    let rot = &sd.left * sd.right.adjoint();
    let m = s.state_matrix() * rot.transpose();
    let psi = PureState::normalized(matcore::flatten(&m))?;
    EntangledStrategy::new(d, s.n, psi, s.alice.clone(), s.bob.conjugated(&rot))
}

fn born_size(g: &Game, n: usize) -> u128 {
    ((g.x_size() * g.y_size() * g.a_size() * g.b_size()) as u128).saturating_pow(n as u32)
}

/// Joint distribution of `(X_[n], Y_[n], A_[n], B_[n])` with questions drawn from `μ^{⊗n}`.
pub fn born_joint<'a>(g: &Game, n: usize, s: impl Into<StrategyRef<'a>>) -> Result<FiniteDistribution, StrategyError> {
    let size = born_size(g, n);
    if size > MAX_BORN_ENTRIES as u128 {
        return Err(StrategyError::TooLarge(size));
    }
    let (xs, ys, asz, bsz) = (g.alice_tuples(n), g.bob_tuples(n), g.alice_answers(n), g.bob_answers(n));
    let (na, nb) = (asz.count(), bsz.count());
    let mut weights = vec![0.0; size as usize];
    match s.into() {
        StrategyRef::Entangled(s) => {
            check_n(s.n, n)?;
            s.check_game(g)?;
            for xi in 0..xs.count() {
                for yi in 0..ys.count() {
                    let q = question_weight(g, &xs, &ys, xi, yi);
                    if q == 0.0 {
                        continue;
                    }
                    let table = s.answer_table(xi, yi);
                    let base = (xi * ys.count() + yi) * na * nb;
                    for (k, p) in table.iter().enumerate() {
                        weights[base + k] = q * p;
                    }
                }
            }
        }
        StrategyRef::Deterministic(s) => {
            check_n(s.n, n)?;
            if s.alice.len() != xs.count() || s.bob.len() != ys.count() {
                return Err(StrategyError::Mismatch("answer function has the wrong domain".into()));
            }
            for xi in 0..xs.count() {
                for yi in 0..ys.count() {
                    let q = question_weight(g, &xs, &ys, xi, yi);
                    let base = (xi * ys.count() + yi) * na * nb;
                    weights[base + s.alice[xi] * nb + s.bob[yi]] = q;
                }
            }
        }
    }
    Ok(FiniteDistribution::from_unnormalized(g.joint_variables(n), weights)?)
}

fn check_n(have: usize, want: usize) -> Result<(), StrategyError> {
    if have != want {
        return Err(StrategyError::Mismatch(format!("strategy targets n = {have}, requested n = {want}")));
    }
    Ok(())
}

pub fn question_weight(g: &Game, xs: &Radix, ys: &Radix, xi: usize, yi: usize) -> f64 {
    (0..xs.n).map(|k| g.mu(xs.digit(xi, k), ys.digit(yi, k))).product()
}

/// Whether every coordinate of the tuples wins.
pub fn wins_all(g: &Game, n: usize, xi: usize, yi: usize, ai: usize, bi: usize) -> bool {
    let (xs, ys, asz, bsz) = (g.alice_tuples(n), g.bob_tuples(n), g.alice_answers(n), g.bob_answers(n));
    (0..n).all(|k| g.wins(xs.digit(xi, k), ys.digit(yi, k), asz.digit(ai, k), bsz.digit(bi, k)))
}

/// Probability of winning all `n` coordinates.
pub fn win_probability<'a>(g: &Game, n: usize, s: impl Into<StrategyRef<'a>>) -> Result<f64, StrategyError> {
    let (xs, ys) = (g.alice_tuples(n), g.bob_tuples(n));
    let (na, nb) = (g.alice_answers(n).count(), g.bob_answers(n).count());
    let mut total = 0.0;
    match s.into() {
        StrategyRef::Entangled(s) => {
            check_n(s.n, n)?;
            s.check_game(g)?;
            for xi in 0..xs.count() {
                for yi in 0..ys.count() {
                    let q = question_weight(g, &xs, &ys, xi, yi);
                    if q == 0.0 {
                        continue;
                    }
                    let table = s.answer_table(xi, yi);
                    for ai in 0..na {
                        for bi in 0..nb {
                            if wins_all(g, n, xi, yi, ai, bi) {
                                total += q * table[ai * nb + bi];
                            }
                        }
                    }
                }
            }
        }
        StrategyRef::Deterministic(s) => {
            check_n(s.n, n)?;
            for xi in 0..xs.count() {
                for yi in 0..ys.count() {
                    if wins_all(g, n, xi, yi, s.alice[xi], s.bob[yi]) {
                        total += question_weight(g, &xs, &ys, xi, yi);
                    }
                }
            }
        }
    }
    Ok(total)
}

pub mod fixtures {
    //! Strategies for CHSH-shaped games (binary questions and answers).

    use std::f64::consts::PI;

    use super::*;

    /// Projector onto `cos θ|0⟩ + sin θ|1⟩`.
    pub fn projector(theta: f64) -> CMatrix {
        let (s, co) = theta.sin_cos();
        CMatrix::from_row_slice(2, 2, &[c(co * co, 0.0), c(co * s, 0.0), c(co * s, 0.0), c(s * s, 0.0)])
    }

    fn pauli_y() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
    }

    fn pauli_z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
    }

    /// Build `ψ_pair^{⊗n}` with all of Alice's qubits first, and product POVMs whose
    /// factor on coordinate `k` may depend on the whole question tuple.
    pub fn product_fixture(
        n: usize,
        pair: [f64; 2],
        alice: impl Fn(usize, &[usize]) -> CMatrix,
        bob: impl Fn(usize, &[usize]) -> CMatrix,
    ) -> EntangledStrategy {
        let d = 1usize << n;
        let mut v = CVector::zeros(d * d);
        for i in 0..d {
            // Only |i⟩|i⟩ survives for a diagonal pair state.
            let amp: f64 = (0..n).map(|k| pair[(i >> (n - 1 - k)) & 1]).product();
            v[i * d + i] = c(amp, 0.0);
        }
        let psi = PureState::normalized(v).expect("nonzero pair");
        let tuples = Radix::new(2, n);
        let family = |local: &dyn Fn(usize, &[usize]) -> CMatrix| {
            let elements = (0..tuples.count())
                .map(|q| {
                    let qs = tuples.decode(q);
                    let zero: Vec<CMatrix> = (0..n).map(|k| local(k, &qs)).collect();
                    (0..tuples.count())
                        .map(|a| {
                            let digits = tuples.decode(a);
                            digits.iter().enumerate().fold(CMatrix::identity(1, 1), |acc, (k, &ak)| {
                                let f = if ak == 0 { zero[k].clone() } else { identity(2) - &zero[k] };
                                acc.kronecker(&f)
                            })
                        })
                        .collect()
                })
                .collect();
            PovmFamily::new(d, elements).expect("fixture POVMs are valid")
        };
        let a = family(&alice);
        let b = family(&bob);
        EntangledStrategy::new(d, n, psi, a, b).expect("fixture is consistent")
    }

    /// Optimal CHSH strategy played independently in each coordinate.
    pub fn tsirelson(n: usize) -> EntangledStrategy {
        let h = 1.0 / 2f64.sqrt();
        product_fixture(
            n,
            [h, h],
            |k, x| projector(x[k] as f64 * PI / 4.0),
            |k, y| projector(PI / 8.0 - y[k] as f64 * PI / 4.0),
        )
    }

    /// Partially entangled pairs with noisy CHSH measurements in which each player's
    /// effect on coordinate `k` also depends on their question in coordinate `k+1 mod n`.
    ///
    /// Bob's dependence shifts his answer marginal along `I − cos2θ·Z`; Alice's adds a
    /// `Y` component. Both directions leave every coordinate's winning probability
    /// unchanged, so conditioning on wins does not skew the question marginals, while the
    /// conditional answer distributions (and the coarse operators) do depend on the
    /// other coordinates' questions.
    pub fn printing(n: usize) -> EntangledStrategy {
        let theta = PI / 6.0;
        let (noise, gamma, delta) = (0.2, 0.05, 0.05);
        let cos2 = (2.0 * theta).cos();
        let noisy = move |t: f64| projector(t).scale(1.0 - noise) + identity(2).scale(noise / 2.0);
        let sign = |b: usize| if b == 0 { 1.0 } else { -1.0 };
        product_fixture(
            n,
            [theta.cos(), theta.sin()],
            move |k, x| noisy(x[k] as f64 * PI / 4.0) + pauli_y().scale(gamma * sign(x[(k + 1) % n])),
            move |k, y| {
                noisy(PI / 8.0 - y[k] as f64 * PI / 4.0)
                    + (identity(2) - pauli_z().scale(cos2)).scale(delta * sign(y[(k + 1) % n]))
            },
        )
    }

    /// Classical product strategy: Alice answers her question, Bob answers 0.
    pub fn detprod(n: usize) -> DeterministicStrategy {
        let r = Radix::new(2, n);
        DeterministicStrategy { n, alice: (0..r.count()).collect(), bob: vec![0; r.count()] }
    }

    /// Random symmetric strategy with full-rank POVM effects.
    pub fn random_strategy<R: Rng>(g: &Game, n: usize, d: usize, rng: &mut R) -> EntangledStrategy {
        let family = |questions: usize, answers: usize, rng: &mut R| {
            let elements = (0..questions)
                .map(|_| {
                    let raw: Vec<CMatrix> = (0..answers).map(|_| random::psd(d, d, rng)).collect();
                    let total = raw.iter().fold(CMatrix::zeros(d, d), |acc, e| acc + e);
                    let inv = matcore::pinv(&matcore::mat_sqrt(&total).expect("PSD sum"), 1e-14);
                    raw.iter().map(|e| matcore::hermitize(&(&inv * e * &inv))).collect()
                })
                .collect();
            PovmFamily::new(d, elements).expect("normalized POVM")
        };
        let alice = family(g.alice_tuples(n).count(), g.alice_answers(n).count(), rng);
        let bob = family(g.bob_tuples(n).count(), g.bob_answers(n).count(), rng);
        let psi = random::pure_state(d * d, rng);
        let s = EntangledStrategy::new(d, n, psi, alice, bob).expect("consistent");
        symmetrize(&s).expect("symmetrizable")
    }

    /// Resolve a fixture name for a given game and repetition count.
    pub fn by_name(name: &str, g: &Game, n: usize) -> Option<Result<EntangledStrategy, StrategyError>> {
        match name {
            "tsirelson" => Some(Ok(tsirelson(n))),
            "printing" => Some(Ok(printing(n))),
            "detprod" => Some(detprod(n).to_entangled(g)),
            _ => None,
        }
    }
}

fn push_numbers(out: &mut String, values: impl Iterator<Item = f64>) {
    for v in values {
        let _ = write!(out, " {v:.16e}");
    }
}

fn push_matrix(out: &mut String, m: &CMatrix) {
    let d = m.nrows();
    push_numbers(out, (0..d * d).flat_map(|k| {
        let z = m[(k / d, k % d)];
        [z.re, z.im]
    }));
}

/// Serialize a strategy. Numbers carry 17 significant digits so parsing is exact.
pub fn write_strategy(s: &EntangledStrategy) -> String {
    let mut out = String::from("parrep-strategy 1\n");
    let _ = writeln!(out, "d {}", s.d);
    let _ = writeln!(out, "n {}", s.n);
    let _ = writeln!(out, "alice {} {}", s.alice.questions(), s.alice.answers());
    let _ = writeln!(out, "bob {} {}", s.bob.questions(), s.bob.answers());
    out.push_str("state");
    push_numbers(&mut out, s.psi.as_vector().iter().flat_map(|z| [z.re, z.im]));
    out.push('\n');
    for (tag, fam) in [("A", &s.alice), ("B", &s.bob)] {
        for q in 0..fam.questions() {
            for a in 0..fam.answers() {
                let _ = write!(out, "{tag} {q} {a}");
                push_matrix(&mut out, fam.element(q, a));
                out.push('\n');
            }
        }
    }
    out
}

fn parse_err(msg: impl Into<String>) -> StrategyError {
    StrategyError::Parse(msg.into())
}

fn parse_usize(tok: Option<&str>, what: &str) -> Result<usize, StrategyError> {
    tok.ok_or_else(|| parse_err(format!("missing {what}")))?.parse().map_err(|_| parse_err(format!("bad {what}")))
}

fn parse_complex(tokens: &[&str], count: usize) -> Result<Vec<matcore::C64>, StrategyError> {
    if tokens.len() != 2 * count {
        return Err(parse_err(format!("expected {} numbers, got {}", 2 * count, tokens.len())));
    }
    tokens
        .chunks(2)
        .map(|p| {
            let re: f64 = p[0].parse().map_err(|_| parse_err(format!("bad number `{}`", p[0])))?;
            let im: f64 = p[1].parse().map_err(|_| parse_err(format!("bad number `{}`", p[1])))?;
            Ok(c(re, im))
        })
        .collect()
}

pub fn parse_strategy(text: &str) -> Result<EntangledStrategy, StrategyError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    if lines.next() != Some("parrep-strategy 1") {
        return Err(parse_err("missing `parrep-strategy 1` header"));
    }
    let mut header = |key: &str| -> Result<Vec<usize>, StrategyError> {
        let line = lines.next().ok_or_else(|| parse_err(format!("missing `{key}` line")))?;
        let mut toks = line.split_whitespace();
        if toks.next() != Some(key) {
            return Err(parse_err(format!("expected `{key}` line, got `{line}`")));
        }
        toks.map(|t| parse_usize(Some(t), key)).collect()
    };
    let d = header("d")?[0];
    let n = header("n")?[0];
    let al = header("alice")?;
    let bo = header("bob")?;
    if al.len() != 2 || bo.len() != 2 {
        return Err(parse_err("alice/bob lines need question and answer counts"));
    }
    let mut psi = None;
    let mut alice = vec![vec![CMatrix::zeros(d, d); al[1]]; al[0]];
    let mut bob = vec![vec![CMatrix::zeros(d, d); bo[1]]; bo[0]];
    let mut seen = 0usize;
    for line in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "state" => {
                let v = parse_complex(&toks[1..], d * d)?;
                psi = Some(PureState::new(CVector::from_vec(v))?);
            }
            tag @ ("A" | "B") => {
                let q = parse_usize(toks.get(1).copied(), "question")?;
                let a = parse_usize(toks.get(2).copied(), "answer")?;
                let vals = parse_complex(&toks[3..], d * d)?;
                let fam = if tag == "A" { &mut alice } else { &mut bob };
                let slot = fam.get_mut(q).and_then(|p| p.get_mut(a)).ok_or_else(|| parse_err(format!("{tag} {q} {a} out of range")))?;
                *slot = CMatrix::from_row_slice(d, d, &vals);
                seen += 1;
            }
            other => return Err(parse_err(format!("unknown record `{other}`"))),
        }
    }
    if seen != al[0] * al[1] + bo[0] * bo[1] {
        return Err(parse_err(format!("expected {} effects, found {seen}", al[0] * al[1] + bo[0] * bo[1])));
    }
    let psi = psi.ok_or_else(|| parse_err("missing state"))?;
    EntangledStrategy::new(d, n, psi, PovmFamily::new(d, alice)?, PovmFamily::new(d, bob)?)
}

pub fn load_strategy(path: &std::path::Path) -> Result<EntangledStrategy, StrategyError> {
    parse_strategy(&std::fs::read_to_string(path)?)
}
