//! Dense complex-matrix kernel.
//!
//! Matrices are stored row-major. Multipartite objects carry an ordered list
//! of subsystem dimensions; the tensor index layout is row-major as well, so
//! for dims `(d0, d1, d2)` the basis state `|i0 i1 i2>` sits at index
//! `(i0 * d1 + i1) * d2 + i2`. Partial traces and dephasing never reorder the
//! surviving factors.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Maximum entrywise |M - M^dagger| accepted as Hermitian.
pub const TOL_HERM: f64 = 1e-9;
/// Maximum |Tr(M) - 1| accepted for a state.
pub const TOL_TRACE: f64 = 1e-9;
/// Eigenvalues in `[-TOL_PSD, 0)` are rounding noise and clamp to zero.
pub const TOL_PSD: f64 = 1e-9;
/// Reconstruction tolerance of the eigensolver.
pub const TOL_RECON: f64 = 1e-10;
/// Maximum |‖ψ‖ - 1| accepted for a pure state.
pub const TOL_NORM: f64 = 1e-9;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn real_diagonal(entries: &[f64]) -> Self {
        let d: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diagonal(&d)
    }

    /// `|ket><bra|`.
    pub fn outer(ket: &[C64], bra: &[C64]) -> Self {
        Self::from_fn(ket.len(), bra.len(), |r, c| ket[r] * bra[c].conj())
    }

    /// The `dim`-dimensional computational basis vector `|index>`.
    pub fn basis_vector(dim: usize, index: usize) -> Vec<C64> {
        let mut v = vec![ZERO; dim];
        v[index] = ONE;
        v
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn set_column(&mut self, c: usize, v: &[C64]) {
        for (r, &z) in v.iter().enumerate() {
            self[(r, c)] = z;
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(rows, cols);
        for r1 in 0..self.rows {
            for c1 in 0..self.cols {
                let a = self[(r1, c1)];
                if a == ZERO {
                    continue;
                }
                for r2 in 0..other.rows {
                    for c2 in 0..other.cols {
                        out[(r1 * other.rows + r2, c1 * other.cols + c2)] = a * other[(r2, c2)];
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols, "vector length does not match columns");
        (0..self.rows)
            .map(|r| {
                self.data[r * self.cols..(r + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `self · rho · self^dagger`.
    pub fn sandwich(&self, rho: &Self) -> Self {
        &(self * rho) * &self.adjoint()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.max_abs_diff(other) <= tol
    }

    /// Largest entrywise modulus of `M - M^dagger`; infinite for non-square input.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for r in 0..self.rows {
            for c in r..self.cols {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// `(M + M^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let adj = self.adjoint();
        Self::from_fn(self.rows, self.cols, |r, c| (self[(r, c)] + adj[(r, c)]) * 0.5)
    }

    /// True when every off-diagonal entry has modulus at most `tol`.
    pub fn is_diagonal(&self, tol: f64) -> bool {
        (0..self.rows).all(|r| (0..self.cols).all(|c| r == c || self[(r, c)].norm() <= tol))
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `V diag(f(λ)) V^dagger`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        let fv: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        ComplexMatrix::from_fn(n, n, |r, c| {
            (0..n).map(|k| v[(r, k)] * fv[k] * v[(c, k)].conj()).sum()
        })
    }
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted descending.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let defect = m.hermitian_defect();
    if defect > TOL_HERM {
        return Err(Error::NonHermitian(defect));
    }
    let n = m.rows;
    if n == 0 {
        return Ok(HermitianEigen {
            values: vec![],
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let eig = m
        .hermitian_part()
        .to_nalgebra()
        .try_symmetric_eigen(f64::EPSILON, 1000 * n.max(10))
        .ok_or(Error::NoConvergence)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// Kronecker product; subsystem dimension lists concatenate.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// Sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("trace norm needs a square matrix".into()));
    }
    if m.hermitian_defect() <= TOL_HERM {
        let eig = eig_hermitian(m)?;
        return Ok(eig.values.iter().map(|x| x.abs()).sum());
    }
    let svd = m
        .to_nalgebra()
        .try_svd(false, false, f64::EPSILON, 1000 * m.rows.max(10))
        .ok_or(Error::NoConvergence)?;
    Ok(svd.singular_values.iter().sum())
}

/// Shannon entropy in bits of a probability vector; negative rounding noise
/// clamps to zero.
pub fn shannon_entropy(probs: impl IntoIterator<Item = f64>) -> f64 {
    probs
        .into_iter()
        .map(|p| p.clamp(0.0, 1.0))
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

/// Binary entropy `h(x)` in bits.
pub fn binary_entropy(x: f64) -> f64 {
    shannon_entropy([x, 1.0 - x])
}

/// Von Neumann entropy `-Tr ρ log2 ρ` in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let eig = eig_hermitian(rho.matrix())?;
    Ok(shannon_entropy(eig.values))
}

/// Quantum relative entropy `S(ρ‖σ)` in bits.
///
/// Returns `f64::INFINITY` when the support of `rho` is not contained in the
/// support of `sigma`: eigenvectors of `sigma` with eigenvalue below
/// [`TOL_PSD`] span the kernel, and more than `1e-9` of `rho`'s weight there
/// counts as a violation.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "relative entropy of states with dimensions {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let neg_entropy = -von_neumann_entropy(rho)?;
    let eig = eig_hermitian(sigma.matrix())?;
    let n = rho.dim();
    let rm = rho.matrix();
    let v = &eig.vectors;
    let mut cross = 0.0;
    let mut kernel_mass = 0.0;
    for (k, &mu) in eig.values.iter().enumerate() {
        // <w_k| rho |w_k>
        let col = v.column(k);
        let rw = rm.mul_vec(&col);
        let weight: f64 = col.iter().zip(&rw).map(|(a, b)| (a.conj() * b).re).sum();
        if mu < TOL_PSD {
            kernel_mass += weight.max(0.0);
        } else {
            cross += weight * mu.log2();
        }
    }
    debug_assert_eq!(v.rows(), n);
    if kernel_mass > 1e-9 {
        return Ok(f64::INFINITY);
    }
    Ok(neg_entropy - cross)
}

pub(crate) fn check_dims(dims: &[usize], total: usize) -> Result<()> {
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(Error::BadDimension(format!("invalid subsystem dimensions {dims:?}")));
    }
    let prod: usize = dims.iter().product();
    if prod != total {
        return Err(Error::DimensionMismatch(format!(
            "subsystem dimensions {dims:?} multiply to {prod}, matrix order is {total}"
        )));
    }
    Ok(())
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Digits of a flat index in the row-major tensor layout.
pub(crate) fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for i in (0..dims.len()).rev() {
        out[i] = index % dims[i];
        index /= dims[i];
    }
    out
}

/// Flat offsets of every multi-index over the listed subsystems.
fn offsets(dims: &[usize], subsystems: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let mut out = vec![0usize];
    for &s in subsystems {
        let mut next = Vec::with_capacity(out.len() * dims[s]);
        for &o in &out {
            for i in 0..dims[s] {
                next.push(o + i * st[s]);
            }
        }
        out = next;
    }
    out
}

pub(crate) fn normalize_subsystems(set: &[usize], count: usize) -> Result<Vec<usize>> {
    let mut v = set.to_vec();
    v.sort_unstable();
    v.dedup();
    if let Some(&index) = v.iter().find(|&&i| i >= count) {
        return Err(Error::BadSubsystemIndex { index, count });
    }
    Ok(v)
}

/// Partial trace of a square operator over every subsystem not in `keep`.
///
/// Surviving subsystems stay in their original order. Returns the reduced
/// operator together with its dimension list.
pub fn partial_trace_matrix(
    m: &ComplexMatrix,
    dims: &[usize],
    keep: &[usize],
) -> Result<(ComplexMatrix, Vec<usize>)> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("partial trace needs a square operator".into()));
    }
    check_dims(dims, m.rows())?;
    let keep = normalize_subsystems(keep, dims.len())?;
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let kept_off = offsets(dims, &keep);
    let traced_off = offsets(dims, &traced);
    let n = kept_off.len();
    let mut out = ComplexMatrix::zeros(n, n);
    for (r, &kr) in kept_off.iter().enumerate() {
        for (c, &kc) in kept_off.iter().enumerate() {
            out[(r, c)] = traced_off.iter().map(|&t| m[(kr + t, kc + t)]).sum();
        }
    }
    let out_dims = if keep.is_empty() {
        vec![1]
    } else {
        keep.iter().map(|&i| dims[i]).collect()
    };
    Ok((out, out_dims))
}

/// Index map sending each flat index to its position after reordering the
/// subsystems so that new subsystem `i` is old subsystem `perm[i]`.
fn permutation_map(dims: &[usize], perm: &[usize]) -> Result<Vec<usize>> {
    let mut seen = perm.to_vec();
    seen.sort_unstable();
    if seen != (0..dims.len()).collect::<Vec<_>>() {
        return Err(Error::BadDimension(format!(
            "{perm:?} is not a permutation of {} subsystems",
            dims.len()
        )));
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let new_strides = strides(&new_dims);
    let total: usize = dims.iter().product();
    Ok((0..total)
        .map(|idx| {
            let d = digits(idx, dims);
            perm.iter().zip(&new_strides).map(|(&p, &s)| d[p] * s).sum()
        })
        .collect())
}

/// Reorders the tensor factors of a square operator: new subsystem `i` is old
/// subsystem `perm[i]`.
pub fn permute_subsystems(m: &ComplexMatrix, dims: &[usize], perm: &[usize]) -> Result<ComplexMatrix> {
    check_dims(dims, m.rows())?;
    let map = permutation_map(dims, perm)?;
    let n = m.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            out[(map[r], map[c])] = m[(r, c)];
        }
    }
    Ok(out)
}

/// A unit-trace positive semidefinite matrix with subsystem structure.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "density matrix must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        check_dims(&dims, matrix.rows())?;
        let defect = matrix.hermitian_defect();
        if defect > TOL_HERM {
            return Err(Error::NonHermitian(defect));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TOL_TRACE || tr.im.abs() > TOL_TRACE {
            return Err(Error::BadTrace(tr.re));
        }
        let eig = eig_hermitian(&matrix)?;
        let min = eig.values.last().copied().unwrap_or(0.0);
        if min < -TOL_PSD {
            return Err(Error::NotPositive(min));
        }
        Ok(Self { matrix, dims })
    }

    /// Wraps a matrix already known to be a state (up to rounding).
    pub(crate) fn from_parts(matrix: ComplexMatrix, dims: Vec<usize>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), matrix.rows());
        debug_assert!(matrix.hermitian_defect() <= 1e-6);
        Self { matrix, dims }
    }

    /// Normalizes a positive operator to unit trace.
    pub(crate) fn from_unnormalized(matrix: ComplexMatrix, dims: Vec<usize>) -> Self {
        let tr = matrix.trace().re;
        Self::from_parts(matrix.hermitian_part().scale_real(1.0 / tr), dims)
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let a = psi.amplitudes();
        Self::from_parts(ComplexMatrix::outer(a, a), psi.dims().to_vec())
    }

    pub fn maximally_mixed(dims: &[usize]) -> Self {
        let n: usize = dims.iter().product();
        Self::from_parts(ComplexMatrix::identity(n).scale_real(1.0 / n as f64), dims.to_vec())
    }

    /// The incoherent basis projector `|index><index|`.
    pub fn basis(dims: &[usize], index: usize) -> Self {
        Self::from_pure(&PureState::basis(dims, index))
    }

    /// Convex combination `Σ p_i ρ_i`; weights must sum to one.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::BadDimension("empty mixture".into()))?
            .1;
        let n = first.dim();
        let mut acc = ComplexMatrix::zeros(n, n);
        for (p, rho) in parts {
            if rho.dims != first.dims {
                return Err(Error::DimensionMismatch("mixture of states with different dims".into()));
            }
            acc += &rho.matrix.scale_real(*p);
        }
        Self::new(acc, first.dims.clone())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Total Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(eig_hermitian(&self.matrix)?.values)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::from_parts(self.matrix.kron(&other.matrix), dims)
    }

    /// Reduced state on the subsystems in `keep`.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        partial_trace(self, keep)
    }

    /// Reorders the subsystems: new subsystem `i` is old subsystem `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let m = permute_subsystems(&self.matrix, &self.dims, perm)?;
        Ok(Self::from_parts(m, perm.iter().map(|&p| self.dims[p]).collect()))
    }

    /// `<ψ|ρ|ψ>`.
    pub fn fidelity_with(&self, psi: &PureState) -> f64 {
        let a = psi.amplitudes();
        let ra = self.matrix.mul_vec(a);
        a.iter().zip(&ra).map(|(x, y)| x.conj() * y).sum::<C64>().re
    }

    /// `Tr[ρ²]`.
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }
}

/// Reduced state on the subsystems listed in `keep`, in their original order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::BadDimension("partial trace must keep at least one subsystem".into()));
    }
    let (m, dims) = partial_trace_matrix(&rho.matrix, &rho.dims, keep)?;
    Ok(DensityMatrix::from_parts(m, dims))
}

/// A normalized state vector with subsystem structure.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
    dims: Vec<usize>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, amplitudes.len())?;
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > TOL_NORM {
            return Err(Error::BadNorm(norm));
        }
        Ok(Self { amplitudes, dims })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(amplitudes: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, amplitudes.len())?;
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(Error::BadNorm(norm));
        }
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|z| z / norm).collect(),
            dims,
        })
    }

    pub fn from_real(amplitudes: &[f64], dims: Vec<usize>) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| C64::new(x, 0.0)).collect(), dims)
    }

    pub fn basis(dims: &[usize], index: usize) -> Self {
        let n = dims.iter().product();
        Self {
            amplitudes: ComplexMatrix::basis_vector(n, index),
            dims: dims.to_vec(),
        }
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn tensor(&self, other: &PureState) -> Self {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { amplitudes, dims }
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    /// Outcome probabilities of a measurement in the incoherent basis.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    fn sigma_z() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
    }

    #[test]
    fn eig_identity() {
        let e = eig_hermitian(&ComplexMatrix::identity(2)).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_pauli_x() {
        let e = eig_hermitian(&sigma_x()).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] + 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // |+> and |-> up to a phase
        let plus = e.vectors.column(0);
        let overlap: C64 = plus.iter().map(|z| z * s).sum();
        assert!((overlap.norm() - 1.0).abs() < 1e-12);
        let minus = e.vectors.column(1);
        let overlap: C64 = minus[0] * s - minus[1] * s;
        assert!((overlap.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(eig_hermitian(&m), Err(Error::NonHermitian(_))));
    }

    #[test]
    fn kron_identities() {
        let i6 = tensor_product(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3));
        assert_eq!(i6, ComplexMatrix::identity(6));
    }

    #[test]
    fn kron_basis_projectors() {
        let p0 = ComplexMatrix::real_diagonal(&[1.0, 0.0]);
        let p1 = ComplexMatrix::real_diagonal(&[0.0, 1.0]);
        let m = tensor_product(&p0, &p1);
        for r in 0..4 {
            for col in 0..4 {
                let expect = if (r, col) == (1, 1) { 1.0 } else { 0.0 };
                assert_eq!(m[(r, col)], c(expect, 0.0));
            }
        }
    }

    #[test]
    fn kron_matches_definition() {
        let x = sigma_x();
        let z = sigma_z();
        let m = tensor_product(&x, &z);
        for i1 in 0..2 {
            for i2 in 0..2 {
                for j1 in 0..2 {
                    for j2 in 0..2 {
                        assert_eq!(m[(2 * i1 + i2, 2 * j1 + j2)], x[(i1, j1)] * z[(i2, j2)]);
                    }
                }
            }
        }
    }

    #[test]
    fn partial_trace_of_bell_state() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = PureState::from_real(&[s, 0.0, 0.0, s], vec![2, 2]).unwrap();
        let rho_a = partial_trace(&bell.to_density(), &[0]).unwrap();
        assert!(rho_a.matrix().approx_eq(&ComplexMatrix::identity(2).scale_real(0.5), 1e-15));
        assert_eq!(rho_a.dims(), &[2]);
    }

    #[test]
    fn partial_trace_rejects_bad_index() {
        let rho = DensityMatrix::maximally_mixed(&[2, 2]);
        assert!(matches!(
            partial_trace(&rho, &[2]),
            Err(Error::BadSubsystemIndex { index: 2, count: 2 })
        ));
    }

    #[test]
    fn trace_norm_of_zero() {
        assert_eq!(trace_norm(&ComplexMatrix::zeros(3, 3)).unwrap(), 0.0);
    }

    #[test]
    fn trace_norm_non_hermitian_uses_singular_values() {
        // |0><1| has a single singular value 1
        let m = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!((trace_norm(&m).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn entropy_of_diag_three_quarters() {
        let rho = DensityMatrix::new(ComplexMatrix::real_diagonal(&[0.75, 0.25]), vec![2]).unwrap();
        let s = von_neumann_entropy(&rho).unwrap();
        assert!((s - (2.0 - 0.75 * 3f64.log2())).abs() < 1e-14);
        assert!((s - 0.811_278).abs() < 1e-6);
    }

    #[test]
    fn entropy_of_maximally_mixed() {
        for d in 2..6 {
            let s = von_neumann_entropy(&DensityMatrix::maximally_mixed(&[d])).unwrap();
            assert!((s - (d as f64).log2()).abs() < 1e-12);
        }
    }

    #[test]
    fn relative_entropy_disjoint_support_is_infinite() {
        let r0 = DensityMatrix::basis(&[2], 0);
        let r1 = DensityMatrix::basis(&[2], 1);
        assert_eq!(relative_entropy(&r0, &r1).unwrap(), f64::INFINITY);
        assert!(relative_entropy(&r0, &r0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn density_matrix_validation() {
        let not_unit = ComplexMatrix::real_diagonal(&[0.5, 0.4]);
        assert!(matches!(DensityMatrix::new(not_unit, vec![2]), Err(Error::BadTrace(_))));
        let negative = ComplexMatrix::real_diagonal(&[1.5, -0.5]);
        assert!(matches!(DensityMatrix::new(negative, vec![2]), Err(Error::NotPositive(_))));
        let mut skew = ComplexMatrix::real_diagonal(&[0.5, 0.5]);
        skew[(0, 1)] = c(0.1, 0.0);
        assert!(matches!(DensityMatrix::new(skew, vec![2]), Err(Error::NonHermitian(_))));
        let ok = ComplexMatrix::identity(4).scale_real(0.25);
        assert!(matches!(DensityMatrix::new(ok, vec![3]), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn permutation_swaps_factors() {
        let a = DensityMatrix::basis(&[2], 1);
        let b = DensityMatrix::maximally_mixed(&[3]);
        let ab = a.tensor(&b);
        let ba = ab.permute(&[1, 0]).unwrap();
        assert!(ba.matrix().approx_eq(b.tensor(&a).matrix(), 0.0));
        assert_eq!(ba.dims(), &[3, 2]);
    }
}
