//! Dense complex linear algebra for small Hilbert spaces.
//!
//! Everything here operates on explicit `dim x dim` complex matrices: density
//! matrices, measurement operators, POVMs, Kronecker products, a Hermitian
//! eigensolver, and the partial-trace reduction used to push measurement
//! operators from a product space down to one factor.
//!
//! Matrices are immutable after construction. The only randomized operation is
//! [`sample_povm`], which takes the caller's RNG, so values can be shared
//! freely across threads.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Numeric tolerances shared by the whole crate.
///
/// Double precision with dimensions up to `DIM_CAP` keeps roundoff well below
/// these thresholds, so violations indicate corrupt inputs rather than noise.
pub mod tol {
    /// Hermiticity residual allowed on density/measurement operators.
    pub const HERM: f64 = 1e-9;
    /// Unit-trace residual allowed on density matrices.
    pub const TRACE: f64 = 1e-9;
    /// Completeness residual allowed on a POVM (sum to identity).
    pub const POVM: f64 = 1e-9;
    /// Most negative eigenvalue tolerated on a positive operator.
    pub const PSD: f64 = 1e-10;
    /// Off-diagonal mass allowed after eigendecomposition.
    pub const EIG: f64 = 1e-9;
    /// Largest tensor-space dimension constructed before failing fast.
    pub const DIM_CAP: usize = 1 << 14;
}

#[derive(Debug, Error)]
pub enum QuantumError {
    #[error("matrix entries must be finite, found {0} at ({1}, {2})")]
    NonFinite(Complex64, usize, usize),
    #[error("matrix is not Hermitian: ||M - M^dag|| = {residual:.3e}")]
    NotHermitian { residual: f64 },
    #[error("operator has eigenvalue {eigenvalue:.3e} below the PSD tolerance")]
    NotPositive { eigenvalue: f64 },
    #[error("operator is not idempotent: ||M^2 - M|| = {residual:.3e}")]
    NotIdempotent { residual: f64 },
    #[error("trace is {trace:.12} instead of 1")]
    BadTrace { trace: f64 },
    #[error("POVM elements sum to identity with residual {residual:.3e}")]
    IncompletePovm { residual: f64 },
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("tensor dimension {0} exceeds the configured cap {1}")]
    DimCap(usize, usize),
    #[error("outcome probabilities deviate from the simplex by {residual:.3e}")]
    CorruptProbabilities { residual: f64 },
    #[error("eigensolver failed to converge after {0} sweeps")]
    NoConvergence(usize),
}

/// Square complex matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dim must be positive");
        Self { dim, data: vec![Complex64::ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::ONE);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Builds a matrix from real entries, row by row.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        Self::from_fn(dim, |i, j| Complex64::new(rows[i][j], 0.0))
    }

    /// Planar rotation by `angle`: `[[cos, sin], [-sin, cos]]`.
    pub fn rotation2(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::from_real_rows(&[&[c, s], &[-s, c]])
    }

    /// Basis projector `|g><g|` on a qubit, `g` in {0, 1}.
    pub fn qubit_projector(g: u8) -> Self {
        let mut m = Self::zeros(2);
        m.set(g as usize, g as usize, Complex64::ONE);
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn check_finite(&self) -> Result<(), QuantumError> {
        for i in 0..self.dim {
            for j in 0..self.dim {
                let v = self.get(i, j);
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Err(QuantumError::NonFinite(v, i, j));
                }
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Self { dim: self.dim, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self { dim: self.dim, data }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.get(i, k);
                if aik == Complex64::ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += aik * other.get(k, j);
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut acc = Complex64::ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self.get(i, k) * other.get(k, i);
            }
        }
        acc
    }

    /// Largest entry magnitude; used as the residual norm in reports.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `||M - M^dag||` in the max-entry norm.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                r = r.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        r
    }

    /// Largest off-diagonal entry magnitude.
    pub fn off_diagonal_max(&self) -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j {
                    r = r.max(self.get(i, j).norm());
                }
            }
        }
        r
    }

    /// `U^dag M U`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.adjoint().matmul(self).matmul(u)
    }
}

/// Serialized as nested rows of `[re, im]` pairs.
impl Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.dim)
            .map(|i| (0..self.dim).map(|j| [self.get(i, j).re, self.get(i, j).im]).collect())
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(deserializer)?;
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(serde::de::Error::custom("matrix rows must be square and nonempty"));
        }
        Ok(Self::from_fn(dim, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
    }
}

/// Hermitian, positive-semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self, QuantumError> {
        matrix.check_finite()?;
        let herm = matrix.hermiticity_residual();
        if herm > tol::HERM {
            return Err(QuantumError::NotHermitian { residual: herm });
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > tol::TRACE {
            return Err(QuantumError::BadTrace { trace });
        }
        let (eigs, _) = hermitian_eigen(&matrix)?;
        if let Some(&lo) = eigs.first() {
            if lo < -tol::PSD {
                return Err(QuantumError::NotPositive { eigenvalue: lo });
            }
        }
        Ok(Self { matrix })
    }

    /// Pure state `|psi><psi|` from an unnormalized amplitude vector.
    pub fn pure(amplitudes: &[Complex64]) -> Result<Self, QuantumError> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        let dim = amplitudes.len();
        let m = ComplexMatrix::from_fn(dim, |i, j| amplitudes[i] * amplitudes[j].conj() / norm);
        Self::new(m)
    }

    /// `1/dim` on the diagonal.
    pub fn maximally_mixed(dim: usize) -> Self {
        let m = ComplexMatrix::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0));
        Self { matrix: m }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Hermitian operator with nonnegative spectrum (no trace constraint).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurementOperator {
    matrix: ComplexMatrix,
}

impl MeasurementOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self, QuantumError> {
        matrix.check_finite()?;
        let herm = matrix.hermiticity_residual();
        if herm > tol::HERM {
            return Err(QuantumError::NotHermitian { residual: herm });
        }
        let (eigs, _) = hermitian_eigen(&matrix)?;
        if let Some(&lo) = eigs.first() {
            if lo < -tol::PSD {
                return Err(QuantumError::NotPositive { eigenvalue: lo });
            }
        }
        Ok(Self { matrix })
    }

    /// Validates a projector: Hermitian and idempotent, which implies the
    /// spectrum sits in {0, 1}. Avoids the eigendecomposition of the general
    /// constructor, which matters for large pattern sums.
    pub fn from_projector(matrix: ComplexMatrix) -> Result<Self, QuantumError> {
        matrix.check_finite()?;
        let herm = matrix.hermiticity_residual();
        if herm > tol::HERM {
            return Err(QuantumError::NotHermitian { residual: herm });
        }
        let residual = matrix.matmul(&matrix).sub(&matrix).max_abs();
        if residual > tol::EIG {
            return Err(QuantumError::NotIdempotent { residual });
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Outcome probability `Tr(F rho)`.
    pub fn probability(&self, rho: &DensityMatrix) -> f64 {
        self.matrix.trace_product(rho.matrix()).re
    }
}

/// Positive operator valued measure: labeled outcomes whose operators sum to
/// the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    outcomes: Vec<String>,
    operators: Vec<MeasurementOperator>,
}

impl Povm {
    pub fn new(outcomes: Vec<String>, operators: Vec<MeasurementOperator>) -> Result<Self, QuantumError> {
        assert_eq!(outcomes.len(), operators.len(), "one label per operator");
        assert!(!operators.is_empty(), "POVM needs at least one outcome");
        let dim = operators[0].dim();
        let mut sum = ComplexMatrix::zeros(dim);
        for op in &operators {
            if op.dim() != dim {
                return Err(QuantumError::DimMismatch(op.dim(), dim));
            }
            sum = sum.add(op.matrix());
        }
        let residual = sum.sub(&ComplexMatrix::identity(dim)).max_abs();
        if residual > tol::POVM {
            return Err(QuantumError::IncompletePovm { residual });
        }
        Ok(Self { outcomes, operators })
    }

    /// Two-outcome projective measurement in the qubit basis rotated by `angle`.
    pub fn qubit_basis(angle: f64) -> Self {
        let r = ComplexMatrix::rotation2(angle);
        let ops = (0..2u8)
            .map(|g| {
                MeasurementOperator::new(ComplexMatrix::qubit_projector(g).conjugate_by(&r))
                    .expect("rotated projector is a valid operator")
            })
            .collect();
        Self::new(vec!["0".into(), "1".into()], ops).expect("basis projectors are complete")
    }

    pub fn dim(&self) -> usize {
        self.operators[0].dim()
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn operators(&self) -> &[MeasurementOperator] {
        &self.operators
    }
}

/// Kronecker product; entry `(i_a i_b, j_a j_b) = a[i_a, j_a] * b[i_b, j_b]`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, QuantumError> {
    let (da, db) = (a.dim(), b.dim());
    let dim = da.checked_mul(db).ok_or(QuantumError::DimCap(usize::MAX, tol::DIM_CAP))?;
    if dim > tol::DIM_CAP {
        return Err(QuantumError::DimCap(dim, tol::DIM_CAP));
    }
    let mut out = ComplexMatrix::zeros(dim);
    for ia in 0..da {
        for ja in 0..da {
            let va = a.get(ia, ja);
            if va == Complex64::ZERO {
                continue;
            }
            for ib in 0..db {
                for jb in 0..db {
                    out.set(ia * db + ib, ja * db + jb, va * b.get(ib, jb));
                }
            }
        }
    }
    Ok(out)
}

/// Kronecker product of a sequence of factors, left to right.
pub fn tensor_chain(factors: &[&ComplexMatrix]) -> Result<ComplexMatrix, QuantumError> {
    assert!(!factors.is_empty());
    let mut acc = factors[0].clone();
    for f in &factors[1..] {
        acc = tensor_product(&acc, f)?;
    }
    Ok(acc)
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues sorted ascending (ties keep the pre-sort diagonal
/// order) and the matching eigenvectors as columns, phase-fixed so each
/// column's largest component is real and nonnegative. `V^dag M V` is diagonal
/// within [`tol::EIG`].
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix), QuantumError> {
    let herm = m.hermiticity_residual();
    if herm > tol::HERM {
        return Err(QuantumError::NotHermitian { residual: herm });
    }
    let n = m.dim();
    if n == 1 {
        return Ok((vec![m.get(0, 0).re], ComplexMatrix::identity(1)));
    }

    let mut a = m.clone();
    // Symmetrize exactly so roundoff in the input cannot drift the sweep.
    for i in 0..n {
        a.set(i, i, Complex64::new(a.get(i, i).re, 0.0));
        for j in (i + 1)..n {
            let v = (a.get(i, j) + a.get(j, i).conj()) * 0.5;
            a.set(i, j, v);
            a.set(j, i, v.conj());
        }
    }
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius().max(1.0);
    let target = scale * 1e-14;

    const MAX_SWEEPS: usize = 60;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += 2.0 * a.get(i, j).norm_sqr();
            }
        }
        if off.sqrt() <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq.norm() <= target / (n as f64) {
                    continue;
                }
                // Phase that makes the pivot real, then a real Jacobi rotation.
                let phase = apq / apq.norm();
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let tau = (aqq - app) / (2.0 * apq.norm());
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Column rotation J: J[p][p]=c, J[p][q]=s*phase, J[q][p]=-s*conj(phase), J[q][q]=c.
                let (jp, jq) = (Complex64::new(c, 0.0), Complex64::new(s, 0.0) * phase);
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, akp * jp - akq * jq.conj());
                    a.set(k, q, akp * jq + akq * jp);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, jp * apk - jq * aqk);
                    a.set(q, k, jq.conj() * apk + jp * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, vkp * jp - vkq * jq.conj());
                    v.set(k, q, vkp * jq + vkq * jp);
                }
            }
        }
    }
    if !converged {
        // One final measurement after the last sweep.
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += 2.0 * a.get(i, j).norm_sqr();
            }
        }
        if off.sqrt() > scale * tol::EIG {
            return Err(QuantumError::NoConvergence(MAX_SWEEPS));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a.get(i, i).re.partial_cmp(&a.get(j, j).re).unwrap().then(i.cmp(&j))
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a.get(i, i).re).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        // Deterministic phase: largest component real and nonnegative.
        let mut best = 0usize;
        let mut best_mag = 0.0f64;
        for k in 0..n {
            let mag = v.get(k, src).norm();
            if mag > best_mag + 1e-15 {
                best_mag = mag;
                best = k;
            }
        }
        let pivot = v.get(best, src);
        let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { Complex64::ONE };
        for k in 0..n {
            vectors.set(k, col, v.get(k, src) * phase);
        }
    }
    Ok((eigenvalues, vectors))
}

/// Sum of eigenvalue magnitudes of `a - b`; the trace norm of the difference.
pub fn abs_eigenvalue_sum(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64, QuantumError> {
    trace_norm_of_difference(a.matrix(), b.matrix())
}

/// Trace norm of the Hermitian difference of two raw matrices.
pub fn trace_norm_of_difference(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64, QuantumError> {
    if a.dim() != b.dim() {
        return Err(QuantumError::DimMismatch(a.dim(), b.dim()));
    }
    let (eigs, _) = hermitian_eigen(&a.sub(b))?;
    Ok(eigs.iter().map(|l| l.abs()).sum())
}

/// Reduces a measurement operator on `H_A (x) H_B` to one on `H_A` that
/// reproduces every trace against product states `rho_A (x) rho_B`:
/// `F'[ia, ja] = sum_{ib, jb} F[(ia, ib), (ja, jb)] * rho_B[jb, ib]`.
///
/// Completeness is preserved: reducing each element of a POVM yields a POVM.
pub fn partial_trace_reduce(
    f: &MeasurementOperator,
    dim_a: usize,
    rho_b: &DensityMatrix,
) -> Result<MeasurementOperator, QuantumError> {
    let db = rho_b.dim();
    if f.dim() != dim_a * db {
        return Err(QuantumError::DimMismatch(f.dim(), dim_a * db));
    }
    let fm = f.matrix();
    let rb = rho_b.matrix();
    let mut out = ComplexMatrix::zeros(dim_a);
    for ia in 0..dim_a {
        for ja in 0..dim_a {
            let mut acc = Complex64::ZERO;
            for ib in 0..db {
                for jb in 0..db {
                    acc += fm.get(ia * db + ib, ja * db + jb) * rb.get(jb, ib);
                }
            }
            out.set(ia, ja, acc);
        }
    }
    MeasurementOperator::new(out)
}

/// Samples an outcome index with probability `Tr(F_q rho)`.
///
/// Probabilities within [`tol::POVM`] of the simplex are clamped and
/// renormalized; anything worse is a hard error because it means the POVM or
/// the state is corrupt.
pub fn sample_povm<R: Rng>(povm: &Povm, rho: &DensityMatrix, rng: &mut R) -> Result<usize, QuantumError> {
    if povm.dim() != rho.dim() {
        return Err(QuantumError::DimMismatch(povm.dim(), rho.dim()));
    }
    // Small POVMs dominate the session hot loop; keep them off the heap.
    let mut stack = [0.0f64; 8];
    let mut heap: Vec<f64>;
    let probs: &mut [f64] = if povm.len() <= 8 {
        for (slot, op) in stack.iter_mut().zip(povm.operators()) {
            *slot = op.probability(rho);
        }
        &mut stack[..povm.len()]
    } else {
        heap = povm.operators().iter().map(|op| op.probability(rho)).collect();
        &mut heap
    };
    let mut residual = 0.0f64;
    let mut total = 0.0f64;
    for p in probs.iter_mut() {
        if *p < 0.0 {
            residual = residual.max(-*p);
            *p = 0.0;
        } else if *p > 1.0 {
            residual = residual.max(*p - 1.0);
            *p = 1.0;
        }
        total += *p;
    }
    residual = residual.max((total - 1.0).abs());
    if residual >= tol::POVM {
        return Err(QuantumError::CorruptProbabilities { residual });
    }
    let draw: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (idx, p) in probs.iter().enumerate() {
        acc += p;
        if draw < acc {
            return Ok(idx);
        }
    }
    Ok(probs.len() - 1)
}
