//! Dense complex Hermitian linear algebra with an explicit tolerance policy.
//!
//! Everything else in the crate goes through the handful of primitives here:
//! a Hermitian eigendecomposition, numerical rank, orthonormal range bases,
//! subspace intersection by principal angles, and the PSD square root.
//! Eigenvalue-based routines are used throughout (rather than mixing SVD and
//! eigen solvers) so that every rank decision is made with the same threshold.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex scalar.
pub type C64 = Complex64;
/// General dense complex matrix.
pub type CMatrix = DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = DVector<C64>;

/// Relative symmetry tolerance accepted by [`HermitianMatrix::new`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Numerical thresholds shared by every rank, order and support decision.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    /// Eigenvalues at or below this are treated as zero when forming supports.
    pub eig_zero: f64,
    /// Allowed negative slack in semidefinite order tests.
    pub psd_slack: f64,
    /// Relative rank threshold (against `max(1, ||M||_2)`).
    pub rank_rel: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            eig_zero: 1e-9,
            psd_slack: 1e-9,
            rank_rel: 1e-9,
        }
    }
}

impl TolerancePolicy {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eig_zero", self.eig_zero),
            ("psd_slack", self.psd_slack),
            ("rank_rel", self.rank_rel),
        ] {
            if !(v > 0.0 && v < 1e-3) {
                return Err(Error::ParameterOutOfRange(format!(
                    "tolerance {name} = {v} must lie in (0, 1e-3)"
                )));
            }
        }
        Ok(())
    }

    /// Absolute threshold for eigenvalues of a matrix with spectral norm `norm`.
    pub fn rank_threshold(&self, norm: f64) -> f64 {
        self.rank_rel * norm.max(1.0)
    }
}

/// A dense Hermitian matrix. The stored entries are exactly Hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    /// Checks Hermiticity to [`SYMMETRY_TOL`] relative to the largest entry and
    /// stores the exact Hermitian part.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let asymmetry = (&m - m.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let allowed = SYMMETRY_TOL * scale.max(f64::MIN_POSITIVE);
        if asymmetry > allowed && asymmetry > 0.0 {
            return Err(Error::NotHermitian { asymmetry, allowed });
        }
        Ok(Self::hermitian_part(&m))
    }

    /// `(M + M*) / 2` without any check. For matrices Hermitian by construction.
    pub fn hermitian_part(m: &CMatrix) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "hermitian_part needs a square matrix");
        Self((m + m.adjoint()).scale(0.5))
    }

    pub fn zeros(n: usize) -> Self {
        Self(CMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(CMatrix::identity(n, n))
    }

    pub fn scalar(n: usize, c: f64) -> Self {
        Self(CMatrix::identity(n, n).scale(c))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self(CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(diag[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        }))
    }

    /// Builds from real rows; rejects ragged or non-symmetric input.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0)))
    }

    /// The rank-one operator `|v><v|`.
    pub fn outer(v: &CVector) -> Self {
        Self::hermitian_part(&(v * v.adjoint()))
    }

    /// Orthogonal projector `B B*` onto the span of orthonormal columns `B`.
    pub fn projector_from_basis(basis: &CMatrix) -> Self {
        Self::hermitian_part(&(basis * basis.adjoint()))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self(self.0.scale(c))
    }

    /// `B* M B`.
    pub fn congruence(&self, b: &CMatrix) -> Self {
        Self::hermitian_part(&(b.adjoint() * &self.0 * b))
    }

    /// `B M B*`.
    pub fn conjugate_by(&self, b: &CMatrix) -> Self {
        Self::hermitian_part(&(b * &self.0 * b.adjoint()))
    }

    /// `<v|M|v>`.
    pub fn expectation(&self, v: &CVector) -> f64 {
        (v.adjoint() * &self.0 * v)[(0, 0)].re
    }

    /// Frobenius norm of `M - other`.
    pub fn distance(&self, other: &Self) -> f64 {
        (&self.0 - &other.0).norm()
    }

    /// Row-major `[re, im]` pairs.
    pub fn to_row_major_pairs(&self) -> Vec<[f64; 2]> {
        let n = self.dim();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let z = self.0[(i, j)];
                out.push([z.re, z.im]);
            }
        }
        out
    }

    pub fn from_row_major_pairs(dim: usize, entries: &[[f64; 2]]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Self::new(CMatrix::from_fn(dim, dim, |i, j| {
            let [re, im] = entries[i * dim + j];
            C64::new(re, im)
        }))
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: Self) -> HermitianMatrix {
        HermitianMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: Self) -> HermitianMatrix {
        HermitianMatrix(&self.0 - &rhs.0)
    }
}

impl Neg for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn neg(self) -> HermitianMatrix {
        HermitianMatrix(-&self.0)
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, rhs: f64) -> HermitianMatrix {
        self.scale(rhs)
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Spectral norm of the decomposed matrix.
    pub fn norm(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }

    /// Spectral calculus: `sum_i f(lambda_i) |v_i><v_i|`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let n = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let w = f(lam);
            scaled.column_mut(k).scale_mut(w);
        }
        if n == 0 {
            return HermitianMatrix::zeros(0);
        }
        HermitianMatrix::hermitian_part(&(scaled * self.eigenvectors.adjoint()))
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.map(|x| x)
    }

    /// Eigenvector columns whose index satisfies `keep`.
    pub fn columns_where_index(&self, keep: impl Fn(usize) -> bool) -> CMatrix {
        let idx: Vec<usize> = (0..self.dim()).filter(|&k| keep(k)).collect();
        select_columns(&self.eigenvectors, &idx)
    }

    /// Eigenvector columns whose eigenvalue satisfies `keep`.
    pub fn columns_where(&self, keep: impl Fn(f64) -> bool) -> CMatrix {
        let idx: Vec<usize> = (0..self.dim())
            .filter(|&k| keep(self.eigenvalues[k]))
            .collect();
        select_columns(&self.eigenvectors, &idx)
    }
}

pub(crate) fn select_columns(m: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_fn(m.nrows(), idx.len(), |i, j| m[(i, idx[j])])
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eig_hermitian(m: &HermitianMatrix) -> SpectralDecomposition {
    let n = m.dim();
    if n == 0 {
        return SpectralDecomposition {
            eigenvalues: Vec::new(),
            eigenvectors: CMatrix::zeros(0, 0),
        };
    }
    let eig = SymmetricEigen::new(m.matrix().clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    SpectralDecomposition {
        eigenvalues: order.iter().map(|&k| eig.eigenvalues[k]).collect(),
        eigenvectors: select_columns(&eig.eigenvectors, &order),
    }
}

/// Count of eigenvalues with `|lambda| > rank_rel * max(1, ||M||_2)`.
pub fn numerical_rank(m: &HermitianMatrix, pol: &TolerancePolicy) -> usize {
    let spec = eig_hermitian(m);
    let thr = pol.rank_threshold(spec.norm());
    spec.eigenvalues.iter().filter(|l| l.abs() > thr).count()
}

/// Orthonormal columns spanning the numerical range of a general matrix.
///
/// The rank decision is made on `M M*`, so the column count equals
/// `numerical_rank(M M*)`.
pub fn orthonormal_range_basis(m: &CMatrix, pol: &TolerancePolicy) -> CMatrix {
    if m.nrows() == 0 || m.ncols() == 0 {
        return CMatrix::zeros(m.nrows(), 0);
    }
    let gram = HermitianMatrix::hermitian_part(&(m * m.adjoint()));
    let spec = eig_hermitian(&gram);
    let thr = pol.rank_threshold(spec.norm());
    spec.columns_where(|l| l.abs() > thr)
}

/// Orthonormal basis of the numerical null space of a general matrix.
pub fn null_space_basis(m: &CMatrix, pol: &TolerancePolicy) -> CMatrix {
    if m.ncols() == 0 {
        return CMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return CMatrix::identity(m.ncols(), m.ncols());
    }
    let gram = HermitianMatrix::hermitian_part(&(m.adjoint() * m));
    let spec = eig_hermitian(&gram);
    let thr = pol.rank_threshold(spec.norm());
    spec.columns_where(|l| l.abs() <= thr)
}

/// Principal-angle cosines between `ran U` and `ran V` (descending), with the
/// matching unit vectors in `ran U`.
pub fn principal_cosines(u: &CMatrix, v: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if u.nrows() != v.nrows() {
        return Err(Error::DimensionMismatch {
            expected: u.nrows(),
            found: v.nrows(),
        });
    }
    if u.ncols() == 0 || v.ncols() == 0 {
        return Ok((Vec::new(), CMatrix::zeros(u.nrows(), 0)));
    }
    let overlap = u.adjoint() * v;
    let gram = HermitianMatrix::hermitian_part(&(&overlap * overlap.adjoint()));
    let spec = eig_hermitian(&gram);
    let k = spec.dim();
    let cosines: Vec<f64> = (0..k)
        .rev()
        .map(|i| spec.eigenvalues[i].clamp(0.0, 1.0).sqrt())
        .collect();
    let order: Vec<usize> = (0..k).rev().collect();
    let vectors = u * select_columns(&spec.eigenvectors, &order);
    Ok((cosines, vectors))
}

/// Orthonormal basis of `ran U ∩ ran V` from principal angles: directions with
/// cosine at least `1 - rank_rel` count as shared.
pub fn subspace_intersection(u: &CMatrix, v: &CMatrix, pol: &TolerancePolicy) -> Result<CMatrix> {
    let (cosines, vectors) = principal_cosines(u, v)?;
    let idx: Vec<usize> = (0..cosines.len())
        .filter(|&k| cosines[k] >= 1.0 - pol.rank_rel)
        .collect();
    Ok(select_columns(&vectors, &idx))
}

/// PSD square root; eigenvalues in `[-psd_slack, 0)` are clamped to zero.
pub fn matrix_sqrt_psd(m: &HermitianMatrix, pol: &TolerancePolicy) -> Result<HermitianMatrix> {
    let spec = eig_hermitian(m);
    if spec.min() < -pol.psd_slack {
        return Err(Error::NotPositive {
            min_eigenvalue: spec.min(),
        });
    }
    Ok(spec.map(|l| l.max(0.0).sqrt()))
}

/// Smallest eigenvalue.
pub fn min_eigenvalue(m: &HermitianMatrix) -> f64 {
    eig_hermitian(m).min()
}

/// `M ⪰ -slack I`.
pub fn is_psd(m: &HermitianMatrix, slack: f64) -> bool {
    min_eigenvalue(m) >= -slack
}

/// Spectral norm of a general matrix.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let gram = if m.nrows() <= m.ncols() {
        m * m.adjoint()
    } else {
        m.adjoint() * m
    };
    eig_hermitian(&HermitianMatrix::hermitian_part(&gram))
        .max()
        .max(0.0)
        .sqrt()
}

/// Unitary discrete Fourier matrix `F_{jk} = d^{-1/2} exp(-2 pi i jk / d)`.
pub fn dft_matrix(d: usize) -> CMatrix {
    let norm = 1.0 / (d as f64).sqrt();
    CMatrix::from_fn(d, d, |j, k| {
        let phase = -2.0 * std::f64::consts::PI * ((j * k) % d) as f64 / d as f64;
        C64::from_polar(norm, phase)
    })
}

/// Unit basis vector `e_k` in dimension `n`.
pub fn basis_vector(n: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[k] = C64::new(1.0, 0.0);
    v
}

/// A vector as a one-column matrix.
pub fn column_matrix(v: &CVector) -> CMatrix {
    CMatrix::from_column_slice(v.len(), 1, v.as_slice())
}

/// Complex vector from real components.
pub fn real_vector(values: &[f64]) -> CVector {
    CVector::from_iterator(values.len(), values.iter().map(|&x| C64::new(x, 0.0)))
}
