//! Entropic quantities in bits and checks of the information inequalities used
//! in the sampleability analysis.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::matcore::{self, CMatrix, DensityMatrix, MatError, Subsystem};
use crate::prob::{FiniteDistribution, ProbError, Variable};

/// Eigenvalues at or below this are treated as outside the support.
pub const SUPPORT_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum InfoError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Prob(#[from] ProbError),
}

fn xlog2x(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * p.log2()
    }
}

/// Von Neumann entropy in bits.
pub fn entropy(rho: &CMatrix) -> Result<f64, MatError> {
    Ok(-matcore::eigh(rho)?.values.iter().map(|&p| xlog2x(p)).sum::<f64>())
}

/// Shannon entropy in bits of a weight vector.
pub fn shannon(p: &[f64]) -> f64 {
    -p.iter().map(|&x| xlog2x(x)).sum::<f64>()
}

/// Classical relative entropy in bits; `+∞` when `p` puts mass where `q` has none.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    let mut s = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a <= 0.0 {
            continue;
        }
        if b <= 0.0 {
            return f64::INFINITY;
        }
        s += a * (a / b).log2();
    }
    s
}

fn unnormalized_relative_entropy(rho: &CMatrix, sigma: &CMatrix) -> Result<f64, MatError> {
    let er = matcore::eigh(rho)?;
    let es = matcore::eigh(sigma)?;
    let overlap = er.vectors.adjoint() * &es.vectors;
    let mut s = 0.0;
    let mut leak = 0.0;
    for (i, &p) in er.values.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        s += xlog2x(p);
        for (j, &q) in es.values.iter().enumerate() {
            let w = p * overlap[(i, j)].norm_sqr();
            if q <= SUPPORT_TOL {
                leak += w;
            } else {
                s -= w * q.log2();
            }
        }
    }
    if leak > SUPPORT_TOL {
        return Ok(f64::INFINITY);
    }
    Ok(s)
}

/// `Tr ρ(log ρ − log σ)` in bits, or `+∞` if the support of `ρ` leaves that of `σ`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, MatError> {
    check_dims(rho, sigma)?;
    unnormalized_relative_entropy(rho.as_matrix(), sigma.as_matrix())
}

fn check_dims(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<(), MatError> {
    if rho.dim() != sigma.dim() {
        return Err(MatError::DimensionMismatch { expected: rho.dim(), got: sigma.dim() });
    }
    Ok(())
}

/// `min{λ : ρ ⪯ 2^λ σ}`, or `+∞` on a support violation.
pub fn relative_min_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, MatError> {
    check_dims(rho, sigma)?;
    let es = matcore::eigh(sigma.as_matrix())?;
    let null = es.reconstruct_with(|q| if q <= SUPPORT_TOL { 1.0 } else { 0.0 });
    if (rho.as_matrix() * null).trace().re > SUPPORT_TOL {
        return Ok(f64::INFINITY);
    }
    let inv_sqrt = es.reconstruct_with(|q| if q <= SUPPORT_TOL { 0.0 } else { 1.0 / q.sqrt() });
    let m = matcore::hermitize(&(&inv_sqrt * rho.as_matrix() * &inv_sqrt));
    let top = matcore::eigh(&m)?.values[0];
    Ok(top.log2())
}

/// `I(A:B)` in bits for a state on `C^{d_a} ⊗ C^{d_b}`.
pub fn mutual_information(rho: &DensityMatrix, d_a: usize, d_b: usize) -> Result<f64, MatError> {
    let m = rho.as_matrix();
    let ra = matcore::partial_trace(m, d_a, d_b, Subsystem::Right)?;
    let rb = matcore::partial_trace(m, d_a, d_b, Subsystem::Left)?;
    Ok(entropy(&ra)? + entropy(&rb)? - entropy(m)?)
}

/// A state classical on the variables of `classical` and quantum on one register.
#[derive(Debug, Clone)]
pub struct CQState {
    classical: FiniteDistribution,
    blocks: Vec<DensityMatrix>,
}

impl CQState {
    pub fn new(classical: FiniteDistribution, blocks: Vec<DensityMatrix>) -> Result<Self, InfoError> {
        if blocks.len() != classical.len() || blocks.is_empty() {
            return Err(InfoError::Shape(format!("{} blocks for {} labels", blocks.len(), classical.len())));
        }
        let d = blocks[0].dim();
        if blocks.iter().any(|b| b.dim() != d) {
            return Err(InfoError::Shape("blocks differ in dimension".into()));
        }
        Ok(Self { classical, blocks })
    }

    pub fn classical(&self) -> &FiniteDistribution {
        &self.classical
    }

    pub fn blocks(&self) -> &[DensityMatrix] {
        &self.blocks
    }

    pub fn quantum_dim(&self) -> usize {
        self.blocks[0].dim()
    }

    /// `Σ_z p(z) ρ_z`.
    pub fn quantum_marginal(&self) -> CMatrix {
        let d = self.quantum_dim();
        let mut m = CMatrix::zeros(d, d);
        for (p, b) in self.classical.weights().iter().zip(&self.blocks) {
            m += b.as_matrix().scale(*p);
        }
        m
    }

    /// Block-diagonal `Σ_z p(z) |z⟩⟨z| ⊗ ρ_z`.
    pub fn to_dense(&self) -> Result<DensityMatrix, MatError> {
        let d = self.quantum_dim();
        let n = self.classical.len();
        let mut m = CMatrix::zeros(n * d, n * d);
        for (z, (p, b)) in self.classical.weights().iter().zip(&self.blocks).enumerate() {
            m.view_mut((z * d, z * d), (d, d)).copy_from(&b.as_matrix().scale(*p));
        }
        DensityMatrix::new(m)
    }
}

/// `σ_{X_1} ⊗ … ⊗ σ_{X_n} ⊗ σ_A` with each `σ_{X_i}` classical.
#[derive(Debug, Clone)]
pub struct ProductCq {
    pub marginals: Vec<Vec<f64>>,
    pub quantum: DensityMatrix,
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// `I(X_i : A)_ρ` for each classical variable `X_i` of a cq-state.
pub fn coordinate_informations(rho: &CQState) -> Result<Vec<f64>, MatError> {
    let cards = rho.classical.cards();
    let d = rho.quantum_dim();
    let s_a = entropy(&rho.quantum_marginal())?;
    let mut out = Vec::with_capacity(cards.len());
    for (i, &card) in cards.iter().enumerate() {
        let mut cond = vec![CMatrix::zeros(d, d); card];
        let mut px = vec![0.0; card];
        for (k, w) in rho.classical.weights().iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            let a = rho.classical.assignment(k);
            px[a[i]] += w;
            cond[a[i]] += rho.blocks[k].as_matrix().scale(*w);
        }
        let mut h = s_a;
        for (m, p) in cond.iter().zip(&px) {
            if *p > 0.0 {
                h -= p * entropy(&m.unscale(*p))?;
            }
        }
        out.push(h);
    }
    Ok(out)
}

/// `Σ_i I(X_i : A)_ρ ≤ S(ρ_{XA} ‖ σ_{XA})`.
pub fn raz_lemma_check(rho: &CQState, sigma: &ProductCq) -> Result<InequalityCheck, InfoError> {
    let cards = rho.classical.cards();
    if cards.len() != sigma.marginals.len()
        || cards.iter().zip(&sigma.marginals).any(|(c, m)| *c != m.len())
        || rho.quantum_dim() != sigma.quantum.dim()
    {
        return Err(InfoError::Shape("product state does not match the cq-state".into()));
    }
    let lhs: f64 = coordinate_informations(rho)?.iter().sum();
    let mut rhs = 0.0;
    for (k, &p) in rho.classical.weights().iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let a = rho.classical.assignment(k);
        let q: f64 = a.iter().zip(&sigma.marginals).map(|(x, m)| m[*x]).product();
        if q <= 0.0 {
            rhs = f64::INFINITY;
            break;
        }
        rhs += p * (p / q).log2() + p * relative_entropy(&rho.blocks[k], &sigma.quantum)?;
    }
    Ok(InequalityCheck { lhs, rhs, ok: lhs <= rhs + 1e-8 })
}

/// Compares `S(ρ'‖ρ)` on the dense states against `S(P_Z'‖P_Z) + E_{z∼P_Z'} S(ρ'_z‖ρ_z)`.
pub fn chain_rule_check(rho_p: &CQState, rho: &CQState) -> Result<InequalityCheck, InfoError> {
    if rho_p.classical.cards() != rho.classical.cards() || rho_p.quantum_dim() != rho.quantum_dim() {
        return Err(InfoError::Shape("cq-states over different registers".into()));
    }
    let lhs = relative_entropy(&rho_p.to_dense()?, &rho.to_dense()?)?;
    let mut rhs = kl_divergence(rho_p.classical.weights(), rho.classical.weights());
    for (k, &p) in rho_p.classical.weights().iter().enumerate() {
        if p > 0.0 && rhs.is_finite() {
            rhs += p * relative_entropy(&rho_p.blocks[k], &rho.blocks[k])?;
        }
    }
    let ok = (lhs.is_infinite() && rhs.is_infinite()) || (lhs - rhs).abs() <= 1e-8 * (1.0 + lhs.abs());
    Ok(InequalityCheck { lhs, rhs, ok })
}

pub mod facts {
    use super::*;
    use crate::matcore::facts::{sweep, FactSummary};
    use crate::matcore::random;

    fn random_weights<R: Rng>(n: usize, rng: &mut R, zeros: bool) -> Vec<f64> {
        let mut w: Vec<f64> = (0..n).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
        if zeros && n > 1 && rng.gen_bool(0.3) {
            let k = rng.gen_range(0..n);
            w[k] = 0.0;
        }
        let s: f64 = w.iter().sum();
        w.iter().map(|x| x / s).collect()
    }

    fn random_cq<R: Rng>(cards: &[usize], d: usize, rng: &mut R) -> Result<CQState, InfoError> {
        let vars: Vec<Variable> = cards.iter().enumerate().map(|(i, &c)| Variable::new(format!("X{}", i + 1), c)).collect();
        let n: usize = cards.iter().product();
        let dist = FiniteDistribution::new(vars, random_weights(n, rng, true))?;
        let blocks = (0..n).map(|_| random::density(d, rng.gen_range(1..=d), rng)).collect();
        CQState::new(dist, blocks)
    }

    fn pair<R: Rng>(rng: &mut R) -> (DensityMatrix, DensityMatrix) {
        let d = rng.gen_range(1..=6);
        let rho = random::density(d, rng.gen_range(1..=d), rng);
        let sigma = if rng.gen_bool(0.2) { random::density(d, rng.gen_range(1..=d), rng) } else { random::full_rank_density(d, rng) };
        (rho, sigma)
    }

    /// `½‖ρ−σ‖₁² ≤ S(ρ‖σ)` with `S` in bits.
    pub fn pinsker_trial<R: Rng>(rng: &mut R) -> Result<(f64, f64), InfoError> {
        let (rho, sigma) = pair(rng);
        let t = matcore::hermitian_trace_norm(&(rho.as_matrix() - sigma.as_matrix()))?;
        Ok((0.5 * t * t, relative_entropy(&rho, &sigma)?))
    }

    /// The same inequality with `S` in nats.
    pub fn pinsker_nats_trial<R: Rng>(rng: &mut R) -> Result<(f64, f64), InfoError> {
        let (rho, sigma) = pair(rng);
        let t = matcore::hermitian_trace_norm(&(rho.as_matrix() - sigma.as_matrix()))?;
        Ok((0.5 * t * t, relative_entropy(&rho, &sigma)? * std::f64::consts::LN_2))
    }

    /// `S(ρ‖σ) ≤ S∞(ρ‖σ)`.
    pub fn max_dominates_trial<R: Rng>(rng: &mut R) -> Result<(f64, f64), InfoError> {
        let (rho, sigma) = pair(rng);
        let s = relative_entropy(&rho, &sigma)?;
        let smax = relative_min_entropy(&rho, &sigma)?;
        if s.is_infinite() && smax.is_infinite() {
            return Ok((0.0, 0.0));
        }
        Ok((s, smax))
    }

    /// `I(A:B)_ρ ≤ S(ρ_AB ‖ σ_A ⊗ τ_B)`.
    pub fn mi_ordering_trial<R: Rng>(rng: &mut R) -> Result<(f64, f64), InfoError> {
        let (da, db) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let rho = random::density(da * db, rng.gen_range(1..=da * db), rng);
        let sa = random::full_rank_density(da, rng);
        let tb = random::full_rank_density(db, rng);
        let prod = DensityMatrix::new(matcore::tensor(sa.as_matrix(), tb.as_matrix()))?;
        Ok((mutual_information(&rho, da, db)?, relative_entropy(&rho, &prod)?))
    }

    pub fn raz_trial<R: Rng>(rng: &mut R) -> Result<(f64, f64), InfoError> {
        let n = rng.gen_range(1..=3);
        let cards: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=3)).collect();
        let d = rng.gen_range(1..=4);
        let rho = random_cq(&cards, d, rng)?;
        let sigma = if rng.gen_bool(0.3) {
            // Marginals of ρ itself, the tightest product reference.
            let marginals = (0..n)
                .map(|i| {
                    let name = format!("X{}", i + 1);
                    rho.classical().marginal(&[name.as_str()]).map(|m| m.weights().to_vec())
                })
                .collect::<Result<Vec<_>, _>>()?;
            ProductCq { marginals, quantum: DensityMatrix::new(rho.quantum_marginal())? }
        } else {
            ProductCq {
                marginals: cards.iter().map(|&c| random_weights(c, rng, false)).collect(),
                quantum: random::full_rank_density(d, rng),
            }
        };
        let r = raz_lemma_check(&rho, &sigma)?;
        Ok((r.lhs, r.rhs))
    }

    /// Reports `|lhs − rhs|` of the chain rule against zero.
    pub fn chain_rule_trial<R: Rng>(rng: &mut R) -> Result<(f64, f64), InfoError> {
        let k = rng.gen_range(1..=4);
        let d = rng.gen_range(1..=4);
        let rho_p = random_cq(&[k], d, rng)?;
        let rho = if rng.gen_bool(0.8) {
            let vars = vec![Variable::new("X1", k)];
            let dist = FiniteDistribution::new(vars, random_weights(k, rng, false))?;
            CQState::new(dist, (0..k).map(|_| random::full_rank_density(d, rng)).collect())?
        } else {
            random_cq(&[k], d, rng)?
        };
        let r = chain_rule_check(&rho_p, &rho)?;
        if r.lhs.is_infinite() && r.rhs.is_infinite() {
            return Ok((0.0, 0.0));
        }
        Ok(((r.lhs - r.rhs).abs(), 0.0))
    }

    pub fn run_all(trials: usize, raz_trials: usize, seed: u64) -> Result<Vec<FactSummary>, InfoError> {
        Ok(vec![
            sweep("pinsker", trials, seed ^ 0x9125, 1e-9, pinsker_trial)?,
            sweep("pinsker_nats", trials, seed ^ 0x9125, 1e-9, pinsker_nats_trial)?,
            sweep("max_relative_entropy_dominates", trials, seed ^ 0x5a11, 1e-9, max_dominates_trial)?,
            sweep("mutual_information_ordering", trials, seed ^ 0x41e0, 1e-8, mi_ordering_trial)?,
            sweep("quantum_raz", raz_trials, seed ^ 0x3a2, 1e-8, raz_trial)?,
            sweep("divergence_chain_rule", trials, seed ^ 0xc4a1, 1e-8, chain_rule_trial)?,
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::c;

    fn diag(v: &[f64]) -> DensityMatrix {
        DensityMatrix::new(CMatrix::from_fn(v.len(), v.len(), |i, j| if i == j { c(v[i], 0.0) } else { c(0.0, 0.0) })).unwrap()
    }

    #[test]
    fn analytic_values() {
        let (p, q) = (diag(&[1.0, 0.0]), diag(&[0.5, 0.5]));
        assert!((relative_entropy(&p, &q).unwrap() - 1.0).abs() < 1e-12);
        assert!((relative_min_entropy(&p, &q).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(relative_entropy(&q, &p).unwrap(), f64::INFINITY);
        assert!(relative_entropy(&q, &q).unwrap().abs() < 1e-12);
        let bell = matcore::PureState::normalized(crate::matcore::CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])).unwrap();
        let rho = DensityMatrix::new(bell.density()).unwrap();
        assert!((mutual_information(&rho, 2, 2).unwrap() - 2.0).abs() < 1e-10);
        let cc = diag(&[0.5, 0.0, 0.0, 0.5]);
        assert!((mutual_information(&cc, 2, 2).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn chain_rule_classical_only() {
        let vars = vec![Variable::new("Z", 2)];
        let blocks = vec![diag(&[0.3, 0.7]), diag(&[1.0, 0.0])];
        let a = CQState::new(FiniteDistribution::new(vars.clone(), vec![0.25, 0.75]).unwrap(), blocks.clone()).unwrap();
        let b = CQState::new(FiniteDistribution::new(vars, vec![0.5, 0.5]).unwrap(), blocks).unwrap();
        let r = chain_rule_check(&a, &b).unwrap();
        let kl = 0.25 * (0.5f64).log2() + 0.75 * (1.5f64).log2();
        assert!(r.ok);
        assert!((r.lhs - kl).abs() < 1e-12);
    }

    #[test]
    fn small_sweeps_pass() {
        for f in facts::run_all(200, 100, 11).unwrap() {
            assert!(f.passed(), "{f:?}");
        }
    }
}
