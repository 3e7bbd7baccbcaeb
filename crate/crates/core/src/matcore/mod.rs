//! Dense complex linear algebra for finite-dimensional quantum states.
//!
//! Eigen and singular value decompositions come from `nalgebra`; everything
//! built on top of them (ordering, phase conventions, polar factors, Schmidt
//! forms) is fixed here so results are reproducible across runs.

pub mod facts;
pub mod random;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use thiserror::Error;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Maximum tolerated deviation from Hermiticity for inputs to spectral routines.
pub const HERMITIAN_TOL: f64 = 1e-8;
/// Eigenvalues down to this value are clamped to zero instead of rejected.
pub const PSD_CLAMP: f64 = -1e-9;
/// Default relative cutoff for pseudo-inverses.
pub const PINV_TOL: f64 = 1e-10;
const PHASE_TOL: f64 = 1e-12;
const POLAR_RANK_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("trace {0} differs from 1")]
    BadTrace(f64),
    #[error("vector norm {0} differs from 1")]
    NotNormalized(f64),
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

fn check_square(m: &CMatrix) -> Result<usize, MatError> {
    if m.nrows() != m.ncols() {
        return Err(MatError::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(m.nrows())
}

/// Largest entrywise modulus of `m - m†`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows().min(m.ncols());
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(m: &CMatrix) -> C64 {
    m.trace()
}

pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn tensor_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

/// Which tensor factor a partial trace removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    Left,
    Right,
}

/// Trace out `side` of an operator on `C^{d_a} ⊗ C^{d_b}`.
pub fn partial_trace(m: &CMatrix, d_a: usize, d_b: usize, side: Subsystem) -> Result<CMatrix, MatError> {
    let n = check_square(m)?;
    if n != d_a * d_b {
        return Err(MatError::DimensionMismatch { expected: d_a * d_b, got: n });
    }
    Ok(match side {
        Subsystem::Right => CMatrix::from_fn(d_a, d_a, |i, k| {
            (0..d_b).map(|j| m[(i * d_b + j, k * d_b + j)]).sum()
        }),
        Subsystem::Left => CMatrix::from_fn(d_b, d_b, |j, l| {
            (0..d_a).map(|i| m[(i * d_b + j, i * d_b + l)]).sum()
        }),
    })
}

/// Multiply a vector by the phase that makes its first non-negligible entry real positive.
fn normalize_phase(v: &mut [C64]) -> C64 {
    for z in v.iter() {
        if z.norm() > PHASE_TOL {
            let p = z.conj() / z.norm();
            for w in v.iter_mut() {
                *w *= p;
            }
            return p;
        }
    }
    C64::new(1.0, 0.0)
}

fn lex_cmp(a: &[C64], b: &[C64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != std::cmp::Ordering::Equal {
            return o;
        }
    }
    std::cmp::Ordering::Equal
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigh {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: CMatrix,
}

impl Eigh {
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let d = self.values.len();
        let mut scaled = self.vectors.clone();
        for k in 0..d {
            let s = f(self.values[k]);
            for i in 0..d {
                scaled[(i, k)] *= s;
            }
        }
        &scaled * self.vectors.adjoint()
    }
}

/// Hermitian eigendecomposition with descending eigenvalues, phase-normalized
/// eigenvectors and ties broken lexicographically on the vectors.
pub fn eigh(m: &CMatrix) -> Result<Eigh, MatError> {
    let d = check_square(m)?;
    let dev = hermitian_deviation(m);
    if dev > HERMITIAN_TOL * (1.0 + frobenius(m)) {
        return Err(MatError::NotHermitian(dev));
    }
    if d == 0 {
        return Ok(Eigh { values: vec![], vectors: CMatrix::zeros(0, 0) });
    }
    let se = hermitize(m).symmetric_eigen();
    let mut cols: Vec<(f64, Vec<C64>)> = (0..d)
        .map(|k| {
            let mut v: Vec<C64> = se.eigenvectors.column(k).iter().copied().collect();
            normalize_phase(&mut v);
            (se.eigenvalues[k], v)
        })
        .collect();
    cols.sort_by(|a, b| {
        if (a.0 - b.0).abs() <= PHASE_TOL {
            lex_cmp(&a.1, &b.1)
        } else {
            b.0.total_cmp(&a.0)
        }
    });
    let values = cols.iter().map(|c| c.0).collect();
    let vectors = CMatrix::from_fn(d, d, |i, k| cols[k].1[i]);
    Ok(Eigh { values, vectors })
}

/// Minimum eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMatrix) -> Result<f64, MatError> {
    Ok(eigh(m)?.values.last().copied().unwrap_or(0.0))
}

/// Positive square root of a PSD matrix. Eigenvalues in `[-1e-9, 0)` are clamped.
pub fn mat_sqrt(m: &CMatrix) -> Result<CMatrix, MatError> {
    let e = eigh(m)?;
    if let Some(&lo) = e.values.last() {
        if lo < PSD_CLAMP * (1.0 + e.values[0].abs()) {
            return Err(MatError::NotPsd(lo));
        }
    }
    Ok(e.reconstruct_with(|x| x.max(0.0).sqrt()))
}

/// Moore-Penrose pseudo-inverse; singular values at most `tol * σ_max` are dropped.
pub fn pinv(m: &CMatrix, tol: f64) -> CMatrix {
    if m.is_empty() {
        return CMatrix::zeros(m.ncols(), m.nrows());
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = tol * smax;
    let mut out = CMatrix::zeros(m.ncols(), m.nrows());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cut && s > 0.0 {
            let vk = vt.row(k).adjoint();
            let uk = u.column(k);
            out += (vk * uk.adjoint()).scale(1.0 / s);
        }
    }
    out
}

/// Unitary `U` with `U·M` positive semidefinite.
///
/// On the range of `M` the factor is the (unique) polar unitary. The
/// complementary part maps the cokernel onto the kernel through the unitary
/// nearest to their overlap, so a PSD input yields the identity.
pub fn polar_psd_factor(m: &CMatrix) -> Result<CMatrix, MatError> {
    let n = check_square(m)?;
    if n == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    let svd = m.clone().svd(true, true);
    let x = svd.u.expect("u requested");
    let y = svd.v_t.expect("v_t requested").adjoint();
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = POLAR_RANK_TOL * smax;
    let (range, null): (Vec<usize>, Vec<usize>) = (0..n).partition(|&k| smax > 0.0 && svd.singular_values[k] > cut);
    let mut u = CMatrix::zeros(n, n);
    for &k in &range {
        u += y.column(k) * x.column(k).adjoint();
    }
    if !null.is_empty() {
        let x0 = x.select_columns(&null);
        let y0 = y.select_columns(&null);
        let overlap = y0.adjoint() * &x0;
        let q = nearest_unitary(&overlap);
        u += y0 * q * x0.adjoint();
    }
    Ok(u)
}

fn nearest_unitary(k: &CMatrix) -> CMatrix {
    let svd = k.clone().svd(true, true);
    svd.u.expect("u requested") * svd.v_t.expect("v_t requested")
}

pub fn trace_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.iter().sum()
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn hermitian_trace_norm(m: &CMatrix) -> Result<f64, MatError> {
    Ok(eigh(m)?.values.iter().map(|x| x.abs()).sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub trace_distance: f64,
    pub fidelity: f64,
}

pub fn trace_distance(rho: &CMatrix, sigma: &CMatrix) -> Result<f64, MatError> {
    if rho.shape() != sigma.shape() {
        return Err(MatError::DimensionMismatch { expected: rho.nrows(), got: sigma.nrows() });
    }
    Ok((0.5 * hermitian_trace_norm(&(rho - sigma))?).clamp(0.0, 1.0))
}

/// `‖√ρ √σ‖₁`.
pub fn fidelity(rho: &CMatrix, sigma: &CMatrix) -> Result<f64, MatError> {
    if rho.shape() != sigma.shape() {
        return Err(MatError::DimensionMismatch { expected: rho.nrows(), got: sigma.nrows() });
    }
    let f = trace_norm(&(mat_sqrt(rho)? * mat_sqrt(sigma)?));
    Ok(f.clamp(0.0, 1.0))
}

pub fn metrics(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Metrics, MatError> {
    Ok(Metrics {
        trace_distance: trace_distance(rho.as_matrix(), sigma.as_matrix())?,
        fidelity: fidelity(rho.as_matrix(), sigma.as_matrix())?,
    })
}

/// A validated density matrix: Hermitian, PSD and unit trace within 1e-8.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self, MatError> {
        check_square(&m)?;
        let tr = m.trace();
        if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
            return Err(MatError::BadTrace(tr.re));
        }
        let lo = min_eigenvalue(&m)?;
        if lo < -1e-8 {
            return Err(MatError::NotPsd(lo));
        }
        Ok(Self(hermitize(&m)))
    }

    /// Normalize a nonzero PSD matrix to unit trace.
    pub fn from_unnormalized(m: CMatrix) -> Result<Self, MatError> {
        let tr = m.trace().re;
        if tr <= 0.0 {
            return Err(MatError::BadTrace(tr));
        }
        Self::new(m.unscale(tr))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self(identity(d).unscale(d as f64))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }
}

/// A unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState(CVector);

impl PureState {
    pub fn new(v: CVector) -> Result<Self, MatError> {
        let n = v.norm();
        if (n - 1.0).abs() > 1e-8 {
            return Err(MatError::NotNormalized(n));
        }
        Ok(Self(v))
    }

    pub fn normalized(v: CVector) -> Result<Self, MatError> {
        let n = v.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(MatError::NotNormalized(n));
        }
        Ok(Self(v.unscale(n)))
    }

    pub fn basis(d: usize, k: usize) -> Self {
        let mut v = CVector::zeros(d);
        v[k] = c(1.0, 0.0);
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &CVector {
        &self.0
    }

    pub fn density(&self) -> CMatrix {
        &self.0 * self.0.adjoint()
    }

    /// Reshape a bipartite vector into its `d_a × d_b` coefficient matrix.
    pub fn coefficient_matrix(&self, d_a: usize, d_b: usize) -> Result<CMatrix, MatError> {
        reshape(&self.0, d_a, d_b)
    }
}

pub fn reshape(v: &CVector, d_a: usize, d_b: usize) -> Result<CMatrix, MatError> {
    if v.len() != d_a * d_b {
        return Err(MatError::DimensionMismatch { expected: d_a * d_b, got: v.len() });
    }
    Ok(CMatrix::from_fn(d_a, d_b, |i, j| v[i * d_b + j]))
}

pub fn flatten(m: &CMatrix) -> CVector {
    let (r, cl) = m.shape();
    CVector::from_fn(r * cl, |k, _| m[(k / cl, k % cl)])
}

/// `(A ⊗ B)|v⟩` computed as `A·V·Bᵀ` on the coefficient matrix.
pub fn apply_local(a: &CMatrix, b: &CMatrix, v: &CVector) -> Result<CVector, MatError> {
    let m = reshape(v, a.ncols(), b.ncols())?;
    Ok(flatten(&(a * m * b.transpose())))
}

/// `⟨v|A ⊗ B|v⟩` for a bipartite vector.
pub fn local_expectation(a: &CMatrix, b: &CMatrix, v: &CVector) -> Result<C64, MatError> {
    let w = apply_local(a, b, v)?;
    Ok(v.dotc(&w))
}

/// Schmidt form `ψ = Σ_k σ_k |l_k⟩|r_k⟩` with descending coefficients and
/// each left vector's first non-negligible entry real positive.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    /// `d_a × k` matrix of left vectors.
    pub left: CMatrix,
    /// `d_b × k` matrix of right vectors.
    pub right: CMatrix,
}

impl SchmidtDecomposition {
    pub fn rank(&self, tol: f64) -> usize {
        self.coefficients.iter().filter(|&&s| s > tol).count()
    }

    pub fn reconstruct(&self) -> CVector {
        let (da, db) = (self.left.nrows(), self.right.nrows());
        let mut v = CVector::zeros(da * db);
        for (k, &s) in self.coefficients.iter().enumerate() {
            for i in 0..da {
                for j in 0..db {
                    v[i * db + j] += self.left[(i, k)] * self.right[(j, k)] * s;
                }
            }
        }
        v
    }
}

pub fn schmidt(psi: &PureState, d_a: usize, d_b: usize) -> Result<SchmidtDecomposition, MatError> {
    let m = psi.coefficient_matrix(d_a, d_b)?;
    let k = d_a.min(d_b);
    let svd = m.svd(true, true);
    let x = svd.u.expect("u requested");
    let yt = svd.v_t.expect("v_t requested");
    let mut left = CMatrix::zeros(d_a, k);
    let mut right = CMatrix::zeros(d_b, k);
    let mut coefficients = Vec::with_capacity(k);
    for col in 0..k {
        let mut l: Vec<C64> = x.column(col).iter().copied().collect();
        let p = normalize_phase(&mut l);
        for i in 0..d_a {
            left[(i, col)] = l[i];
        }
        // ψ = Σ σ x_k ⊗ conj(y_k), where row k of v_t is y_k†.
        for j in 0..d_b {
            right[(j, col)] = yt[(col, j)] * p.conj();
        }
        coefficients.push(svd.singular_values[col]);
    }
    Ok(SchmidtDecomposition { coefficients, left, right })
}

/// Symmetric purification `Σ_j √λ_j |v_j⟩|v_j⟩` in the eigenbasis of `ρ`.
/// Returns the state and the eigenbasis (columns).
pub fn symmetric_purification(rho: &DensityMatrix) -> Result<(PureState, CMatrix), MatError> {
    let e = eigh(rho.as_matrix())?;
    let d = rho.dim();
    let mut v = CVector::zeros(d * d);
    for k in 0..d {
        let s = e.values[k].max(0.0).sqrt();
        let col = e.vectors.column(k);
        for i in 0..d {
            for j in 0..d {
                v[i * d + j] += col[i] * col[j] * s;
            }
        }
    }
    Ok((PureState::normalized(v)?, e.vectors))
}

/// Transpose of `y` taken in the orthonormal basis given by the columns of `basis`.
pub fn transpose_in_basis(y: &CMatrix, basis: &CMatrix) -> CMatrix {
    let inner = basis.adjoint() * y * basis;
    basis * inner.transpose() * basis.adjoint()
}

/// Entrywise complex conjugate taken in the orthonormal basis `basis`.
pub fn conjugate_in_basis(y: &CMatrix, basis: &CMatrix) -> CMatrix {
    let inner = basis.adjoint() * y * basis;
    basis * inner.map(|z| z.conj()) * basis.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bell() -> PureState {
        let s = 1.0 / 2f64.sqrt();
        PureState::new(CVector::from_vec(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)])).unwrap()
    }

    #[test]
    fn ptrace_of_product() {
        let rho = CMatrix::from_row_slice(2, 2, &[c(0.7, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.3, 0.0)]);
        let sigma = identity(3).scale(2.0);
        let out = partial_trace(&tensor(&rho, &sigma), 2, 3, Subsystem::Right).unwrap();
        assert!(frobenius(&(out - rho.scale(6.0))) < 1e-14);
        let out = partial_trace(&tensor(&rho, &sigma), 2, 3, Subsystem::Left).unwrap();
        assert!(frobenius(&(out - sigma.scale(1.0))) < 1e-14);
    }

    #[test]
    fn ptrace_rejects_bad_dims() {
        assert!(partial_trace(&identity(6), 2, 2, Subsystem::Left).is_err());
    }

    #[test]
    fn sqrt_of_diag() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(4.0, 0.0), c(0.0, 0.0)]));
        let r = mat_sqrt(&m).unwrap();
        assert_abs_diff_eq!(r[(0, 0)].re, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r[(1, 1)].re, 0.0, epsilon = 1e-14);
        let bad = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(mat_sqrt(&bad), Err(MatError::NotHermitian(_))));
        let neg = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(-0.1, 0.0)]));
        assert!(matches!(mat_sqrt(&neg), Err(MatError::NotPsd(_))));
    }

    #[test]
    fn pinv_of_projector() {
        let p = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]));
        assert!(frobenius(&(pinv(&p, PINV_TOL) - &p)) < 1e-14);
    }

    #[test]
    fn polar_of_psd_is_identity() {
        let p = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.3, 0.0)]));
        let u = polar_psd_factor(&p).unwrap();
        assert!(frobenius(&(u - identity(3))) < 1e-12);
        let z = CMatrix::zeros(2, 2);
        assert!(frobenius(&(polar_psd_factor(&z).unwrap() - identity(2))) < 1e-12);
    }

    #[test]
    fn polar_makes_psd() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(2.0, 0.0), c(-1.0, 0.5), c(0.3, 0.0)]);
        let u = polar_psd_factor(&m).unwrap();
        assert!(frobenius(&(&u * u.adjoint() - identity(2))) < 1e-12);
        let p = &u * &m;
        assert!(hermitian_deviation(&p) < 1e-12);
        assert!(min_eigenvalue(&p).unwrap() > -1e-12);
    }

    #[test]
    fn schmidt_examples() {
        let s = schmidt(&bell(), 2, 2).unwrap();
        assert_abs_diff_eq!(s.coefficients[0], 1.0 / 2f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(s.coefficients[1], 1.0 / 2f64.sqrt(), epsilon = 1e-14);
        let prod = PureState::basis(4, 1);
        let s = schmidt(&prod, 2, 2).unwrap();
        assert_abs_diff_eq!(s.coefficients[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.coefficients[1], 0.0, epsilon = 1e-14);
        let v = s.reconstruct();
        assert!((v - prod.as_vector()).norm() < 1e-14);
    }

    #[test]
    fn metrics_examples() {
        let a = DensityMatrix::new(PureState::basis(2, 0).density()).unwrap();
        let b = DensityMatrix::new(PureState::basis(2, 1).density()).unwrap();
        let m = metrics(&a, &b).unwrap();
        assert_abs_diff_eq!(m.trace_distance, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.fidelity, 0.0, epsilon = 1e-7);
        let m = metrics(&a, &a).unwrap();
        assert_abs_diff_eq!(m.trace_distance, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.fidelity, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn purification_of_mixed_qubit_is_bell() {
        let (psi, basis) = symmetric_purification(&DensityMatrix::maximally_mixed(2)).unwrap();
        let s = schmidt(&psi, 2, 2).unwrap();
        assert_abs_diff_eq!(s.coefficients[0], 1.0 / 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(s.coefficients[1], 1.0 / 2f64.sqrt(), epsilon = 1e-12);
        assert!(frobenius(&(basis.adjoint() * &basis - identity(2))) < 1e-12);
        let red = partial_trace(&psi.density(), 2, 2, Subsystem::Right).unwrap();
        assert!(frobenius(&(red - DensityMatrix::maximally_mixed(2).into_matrix())) < 1e-12);
    }

    #[test]
    fn eigh_is_descending() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)]);
        let e = eigh(&m).unwrap();
        assert_abs_diff_eq!(e.values[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.values[1], 0.0, epsilon = 1e-12);
        assert!(e.vectors[(0, 0)].im.abs() < 1e-14 && e.vectors[(0, 0)].re > 0.0);
    }

    #[test]
    fn local_expectation_matches_kron() {
        let a = CMatrix::from_row_slice(2, 2, &[c(0.2, 0.0), c(0.1, 0.3), c(0.1, -0.3), c(0.5, 0.0)]);
        let b = CMatrix::from_row_slice(2, 2, &[c(0.9, 0.0), c(0.0, 0.2), c(0.0, -0.2), c(0.1, 0.0)]);
        let v = bell();
        let direct = v.as_vector().dotc(&(tensor(&a, &b) * v.as_vector()));
        let fast = local_expectation(&a, &b, v.as_vector()).unwrap();
        assert!((direct - fast).norm() < 1e-14);
    }
}
