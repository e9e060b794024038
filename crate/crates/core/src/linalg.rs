//! Dense complex matrices and density-matrix utilities.
//!
//! Everything downstream (Hamiltonians, collapse operators, conditional
//! states, POVM elements) is expressed with [`ComplexMatrix`]. Hilbert
//! dimensions in this crate never exceed a few hundred, so storage is dense
//! and row-major. Hermitian eigendecomposition is delegated to `nalgebra`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest row or column count `tensor` will produce unless told otherwise.
pub const DEFAULT_DIM_CAP: usize = 4096;

/// Tolerances for [`QuantumState`] validation.
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-9;
pub const POSITIVITY_TOL: f64 = 1e-9;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix given {} entries",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let cl = rows.first().map_or(0, |x| x.len());
        Self::from_fn(r, cl, |i, j| C64::new(rows[i][j], 0.0))
    }

    /// Outer product |u⟩⟨v|.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
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

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut e: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                e = e.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        e
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// (M + M†)/2
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| 0.5 * (self[(i, j)] + self[(j, i)].conj()))
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let row_out = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let row_b = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, b) in row_out.iter_mut().zip(row_b) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Kronecker product with the default size cap.
    pub fn tensor(&self, rhs: &Self) -> Result<Self> {
        self.tensor_with_cap(rhs, DEFAULT_DIM_CAP)
    }

    pub fn tensor_with_cap(&self, rhs: &Self, cap: usize) -> Result<Self> {
        let rows = self.rows.checked_mul(rhs.rows).ok_or(Error::TooLarge(usize::MAX, cap))?;
        let cols = self.cols.checked_mul(rhs.cols).ok_or(Error::TooLarge(usize::MAX, cap))?;
        if rows > cap || cols > cap {
            return Err(Error::TooLarge(rows.max(cols), cap));
        }
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        out[(i * rhs.rows + k, j * rhs.cols + l)] = a * rhs[(k, l)];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Tensor product of a list of operators, left to right.
    pub fn tensor_all(ops: &[&Self]) -> Result<Self> {
        let mut acc = Self::identity(1);
        for op in ops {
            acc = acc.tensor(op)?;
        }
        Ok(acc)
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    /// Eigendecomposition of the Hermitian part. Eigenvalues ascending;
    /// eigenvectors are the columns of the returned matrix.
    pub fn eigh(&self) -> (Vec<f64>, ComplexMatrix) {
        assert!(self.is_square(), "eigh of non-square matrix");
        let eig = self.hermitian_part().to_nalgebra().symmetric_eigen();
        let mut order: Vec<usize> = (0..self.rows).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = Self::from_fn(self.rows, self.cols, |i, j| eig.eigenvectors[(i, order[j])]);
        (values, vectors)
    }

    pub fn eigvalsh(&self) -> Vec<f64> {
        self.eigh().0
    }

    /// Rebuild V diag(f(λ)) V† from the Hermitian part.
    pub fn hermitian_map(&self, f: impl Fn(f64) -> f64) -> Self {
        let (vals, vecs) = self.eigh();
        let n = self.rows;
        Self::from_fn(n, n, |i, j| {
            (0..n).map(|k| vecs[(i, k)] * f(vals[k]) * vecs[(j, k)].conj()).sum()
        })
    }

    /// Trace norm of a Hermitian matrix, Σ|λ|.
    pub fn trace_norm_hermitian(&self) -> f64 {
        self.eigvalsh().iter().map(|l| l.abs()).sum()
    }

    /// Frobenius inner product Tr(A† B).
    pub fn inner(&self, other: &Self) -> C64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    /// Tr(A B) without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut s = C64::new(0.0, 0.0);
        for i in 0..self.rows {
            for k in 0..self.cols {
                s += self[(i, k)] * other[(k, i)];
            }
        }
        s
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
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

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// Annihilation operator truncated to `n` Fock levels.
pub fn annihilation(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |i, j| if j == i + 1 { c((j as f64).sqrt(), 0.0) } else { c(0.0, 0.0) })
}

pub fn number_op(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_diag(&(0..n).map(|k| c(k as f64, 0.0)).collect::<Vec<_>>())
}

/// Density matrix over an ordered tensor product of subsystems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumState {
    dims: Vec<usize>,
    rho: ComplexMatrix,
}

impl QuantumState {
    /// Validates Hermiticity, unit trace and positivity. Eigenvalues in
    /// `[-POSITIVITY_TOL, 0)` are clipped and the state renormalised.
    pub fn new(dims: Vec<usize>, rho: ComplexMatrix) -> Result<Self> {
        let d: usize = dims.iter().product();
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::Dimension("empty subsystem list or zero dimension".into()));
        }
        if rho.rows() != d || rho.cols() != d {
            return Err(Error::Dimension(format!(
                "dims {dims:?} need a {d}x{d} matrix, got {}x{}",
                rho.rows(),
                rho.cols()
            )));
        }
        let herm = rho.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (error {herm:e})")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let rho = rho.hermitian_part();
        let (vals, vecs) = rho.eigh();
        let min = vals.first().copied().unwrap_or(0.0);
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        if min < 0.0 {
            log::warn!("clipping eigenvalue {min:e} to zero");
            let clipped: Vec<f64> = vals.iter().map(|l| l.max(0.0)).collect();
            let total: f64 = clipped.iter().sum();
            let fixed = ComplexMatrix::from_fn(d, d, |i, j| {
                (0..d).map(|k| vecs[(i, k)] * (clipped[k] / total) * vecs[(j, k)].conj()).sum()
            });
            return Ok(Self { dims, rho: fixed });
        }
        Ok(Self { dims, rho })
    }

    /// Project a nearly-physical Hermitian matrix onto the state space:
    /// symmetrise, clip negative eigenvalues and renormalise. Used for
    /// reconstructions whose moments are truncated.
    pub fn from_hermitian_projected(dims: Vec<usize>, m: &ComplexMatrix) -> Result<Self> {
        let h = m.hermitian_part();
        let clipped = h.hermitian_map(|l| l.max(0.0));
        let tr = clipped.trace().re;
        if tr <= 0.0 {
            return Err(Error::InvalidState("matrix has no positive part".into()));
        }
        Self::new(dims, clipped.scale_real(1.0 / tr))
    }

    pub fn pure(dims: Vec<usize>, psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Self::new(dims, ComplexMatrix::outer(&v, &v))
    }

    /// Fock state |n⟩ in a `dim`-level mode.
    pub fn fock(dim: usize, n: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::Dimension(format!("level {n} outside {dim}-level space")));
        }
        let mut v = vec![c(0.0, 0.0); dim];
        v[n] = c(1.0, 0.0);
        Self::pure(vec![dim], &v)
    }

    /// Coherent state truncated to `dim` levels and renormalised.
    pub fn coherent(dim: usize, alpha: C64) -> Result<Self> {
        let mut v = Vec::with_capacity(dim);
        let mut amp = c(1.0, 0.0);
        for n in 0..dim {
            if n > 0 {
                amp = amp * alpha / (n as f64).sqrt();
            }
            v.push(amp);
        }
        Self::pure(vec![dim], &v)
    }

    /// Thermal state with mean occupation `nbar`, truncated and renormalised.
    pub fn thermal(dim: usize, nbar: f64) -> Result<Self> {
        let ratio = nbar / (1.0 + nbar);
        let p: Vec<f64> = (0..dim).map(|n| ratio.powi(n as i32)).collect();
        let total: f64 = p.iter().sum();
        Self::new(vec![dim], ComplexMatrix::from_diag(&p.iter().map(|x| c(x / total, 0.0)).collect::<Vec<_>>()))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.rho.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.rho
    }

    pub fn expectation(&self, op: &ComplexMatrix) -> C64 {
        self.rho.trace_product(op)
    }

    pub fn purity(&self) -> f64 {
        self.rho.trace_product(&self.rho).re
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Ok(Self { dims, rho: self.rho.tensor(&other.rho)? })
    }

    /// Embed a single-mode state into a larger Fock space (zero padding).
    pub fn padded(&self, dim: usize) -> Result<Self> {
        if self.dims.len() != 1 || dim < self.dim() {
            return Err(Error::Dimension("padding needs a single subsystem and a larger target".into()));
        }
        let d = self.dim();
        let m = ComplexMatrix::from_fn(dim, dim, |i, j| if i < d && j < d { self.rho[(i, j)] } else { c(0.0, 0.0) });
        Ok(Self { dims: vec![dim], rho: m })
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.dims[k + 1];
        }
        s
    }

    fn unflatten(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            out[k] = idx % self.dims[k];
            idx /= self.dims[k];
        }
        out
    }

    /// Reduced state on the subsystems listed in `keep` (kept in their
    /// original order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::Dimension("partial trace needs at least one kept subsystem".into()));
        }
        let mut keep: Vec<usize> = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.iter().any(|&k| k >= self.dims.len()) {
            return Err(Error::Dimension(format!("subsystem index out of range for dims {:?}", self.dims)));
        }
        let kept_dims: Vec<usize> = keep.iter().map(|&k| self.dims[k]).collect();
        let dk: usize = kept_dims.iter().product();
        let mut kept_strides = vec![1; keep.len()];
        for k in (0..keep.len().saturating_sub(1)).rev() {
            kept_strides[k] = kept_strides[k + 1] * kept_dims[k + 1];
        }
        let traced: Vec<usize> = (0..self.dims.len()).filter(|k| !keep.contains(k)).collect();
        let d = self.dim();
        let mut out = ComplexMatrix::zeros(dk, dk);
        for i in 0..d {
            let mi = self.unflatten(i);
            let ri: usize = keep.iter().zip(&kept_strides).map(|(&k, &s)| mi[k] * s).sum();
            for j in 0..d {
                let mj = self.unflatten(j);
                if traced.iter().any(|&t| mi[t] != mj[t]) {
                    continue;
                }
                let rj: usize = keep.iter().zip(&kept_strides).map(|(&k, &s)| mj[k] * s).sum();
                out[(ri, rj)] += self.rho[(i, j)];
            }
        }
        Self::new(kept_dims, out)
    }

    /// Transpose on one subsystem only.
    pub fn partial_transpose(&self, subsystem: usize) -> Result<ComplexMatrix> {
        if subsystem >= self.dims.len() {
            return Err(Error::Dimension(format!(
                "subsystem {subsystem} out of range for dims {:?}",
                self.dims
            )));
        }
        let stride = self.strides()[subsystem];
        let d = self.dim();
        let mut out = ComplexMatrix::zeros(d, d);
        for i in 0..d {
            let ai = (i / stride) % self.dims[subsystem];
            for j in 0..d {
                let aj = (j / stride) % self.dims[subsystem];
                // swap the subsystem index between row and column
                let ii = i - ai * stride + aj * stride;
                let jj = j - aj * stride + ai * stride;
                out[(ii, jj)] = self.rho[(i, j)];
            }
        }
        Ok(out)
    }

    /// N = (‖ρ^{T_cut}‖₁ − 1)/2 for the bipartition (cut | rest).
    pub fn negativity(&self, cut: usize) -> Result<f64> {
        if self.dims.len() < 2 {
            return Err(Error::Dimension("negativity needs at least two subsystems".into()));
        }
        let pt = self.partial_transpose(cut)?;
        Ok(((pt.trace_norm_hermitian() - 1.0) / 2.0).max(0.0))
    }

    /// Uhlmann fidelity (Tr√(√σ ρ √σ))².
    pub fn fidelity(&self, target: &Self) -> Result<f64> {
        if self.dims != target.dims {
            return Err(Error::Dimension(format!("fidelity between dims {:?} and {:?}", self.dims, target.dims)));
        }
        let sq = target.rho.hermitian_map(|l| l.max(0.0).sqrt());
        let inner = sq.matmul(&self.rho).matmul(&sq);
        let s: f64 = inner.eigvalsh().iter().map(|l| l.max(0.0).sqrt()).sum();
        Ok((s * s).clamp(0.0, 1.0))
    }

    /// ⟨ψ|ρ|ψ⟩ for a normalised vector.
    pub fn fidelity_pure(&self, psi: &[C64]) -> f64 {
        let rpsi = self.rho.apply(psi);
        psi.iter().zip(&rpsi).map(|(a, b)| a.conj() * b).sum::<C64>().re
    }

    /// Trace distance ½‖ρ − σ‖₁.
    pub fn trace_distance(&self, other: &Self) -> f64 {
        0.5 * (&self.rho - &other.rho).trace_norm_hermitian()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
    }

    pub(crate) fn random_matrix(rng: &mut ChaCha8Rng, r: usize, cl: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(r, cl, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    pub(crate) fn random_state(rng: &mut ChaCha8Rng, dims: Vec<usize>) -> QuantumState {
        let d: usize = dims.iter().product();
        let g = random_matrix(rng, d, d);
        let m = g.matmul(&g.adjoint());
        let tr = m.trace().re;
        QuantumState::new(dims, m.scale_real(1.0 / tr)).unwrap()
    }

    fn bell() -> QuantumState {
        let s = 0.5f64.sqrt();
        QuantumState::pure(vec![2, 2], &[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]).unwrap()
    }

    #[test]
    fn tensor_identities() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(i2.tensor(&i2).unwrap(), ComplexMatrix::identity(4));
        let zi = pauli_z().tensor(&i2).unwrap();
        let expect = ComplexMatrix::from_diag(&[c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0)]);
        assert_eq!(zi, expect);
    }

    #[test]
    fn tensor_matches_elementwise_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(&mut rng, 2, 2);
        let b = random_matrix(&mut rng, 3, 3);
        let t = a.tensor(&b).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..3 {
                    for l in 0..3 {
                        assert_eq!(t[(i * 3 + k, j * 3 + l)], a[(i, j)] * b[(k, l)]);
                    }
                }
            }
        }
    }

    #[test]
    fn tensor_cap_is_enforced() {
        let a = ComplexMatrix::identity(100);
        assert!(matches!(a.tensor(&a), Err(Error::TooLarge(..))));
        assert!(a.tensor_with_cap(&a, 10_000).is_ok());
    }

    #[test]
    fn partial_trace_of_product_and_bell() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ra = random_state(&mut rng, vec![2]);
        let rb = random_state(&mut rng, vec![3]);
        let prod = ra.tensor(&rb).unwrap();
        assert!(prod.partial_trace(&[0]).unwrap().matrix().max_abs_diff(ra.matrix()) < 1e-12);
        assert!(prod.partial_trace(&[1]).unwrap().matrix().max_abs_diff(rb.matrix()) < 1e-12);

        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(bell().partial_trace(&[0]).unwrap().matrix().max_abs_diff(&half) < 1e-12);
        assert!(bell().partial_trace(&[1]).unwrap().matrix().max_abs_diff(&half) < 1e-12);
        assert!(bell().partial_trace(&[]).is_err());
    }

    #[test]
    fn partial_trace_matches_index_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = random_state(&mut rng, vec![2, 3]);
        let m = s.matrix();
        let mut ra = ComplexMatrix::zeros(2, 2);
        let mut rb = ComplexMatrix::zeros(3, 3);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..3 {
                    ra[(i, j)] += m[(i * 3 + k, j * 3 + k)];
                }
            }
        }
        for k in 0..3 {
            for l in 0..3 {
                for i in 0..2 {
                    rb[(k, l)] += m[(i * 3 + k, i * 3 + l)];
                }
            }
        }
        assert!(s.partial_trace(&[0]).unwrap().matrix().max_abs_diff(&ra) < 1e-12);
        assert!(s.partial_trace(&[1]).unwrap().matrix().max_abs_diff(&rb) < 1e-12);
    }

    #[test]
    fn partial_transpose_spectra() {
        let pt = bell().partial_transpose(1).unwrap();
        let ev = pt.eigvalsh();
        for (got, want) in ev.iter().zip([-0.5, 0.5, 0.5, 0.5]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let prod = random_state(&mut rng, vec![2]).tensor(&random_state(&mut rng, vec![3])).unwrap();
        let e0 = prod.matrix().eigvalsh();
        let e1 = prod.partial_transpose(1).unwrap().eigvalsh();
        for (a, b) in e0.iter().zip(&e1) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        assert!(prod.partial_transpose(2).is_err());
    }

    #[test]
    fn negativity_of_schmidt_states() {
        assert_abs_diff_eq!(bell().negativity(1).unwrap(), 0.5, epsilon = 1e-12);
        // √p0|g0⟩ + √p1|e1⟩ with Schmidt coefficients c_i: N = ((Σc_i)² − 1)/2.
        for p1 in [0.05, 0.14, 0.3, 0.5] {
            let p0: f64 = 1.0 - p1;
            let mut v = vec![c(0.0, 0.0); 6];
            v[0] = c(p0.sqrt(), 0.0);
            v[3 + 1] = c(p1.sqrt(), 0.0);
            let s = QuantumState::pure(vec![2, 3], &v).unwrap();
            let oracle = ((p0.sqrt() + p1.sqrt()).powi(2) - 1.0) / 2.0;
            assert_abs_diff_eq!(s.negativity(1).unwrap(), oracle, epsilon = 1e-12);
            assert_abs_diff_eq!(s.negativity(0).unwrap(), oracle, epsilon = 1e-12);
        }
    }

    #[test]
    fn trace_norm_from_negative_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let s = random_state(&mut rng, vec![2, 3]);
            let pt = s.partial_transpose(1).unwrap();
            let ev = pt.eigvalsh();
            let neg: f64 = ev.iter().filter(|l| **l < 0.0).map(|l| -l).sum();
            assert_abs_diff_eq!(pt.trace_norm_hermitian(), 1.0 + 2.0 * neg, epsilon = 1e-10);
        }
    }

    #[test]
    fn fidelity_cases() {
        let v0 = QuantumState::fock(2, 0).unwrap();
        let v1 = QuantumState::fock(2, 1).unwrap();
        assert_abs_diff_eq!(v0.fidelity(&v0).unwrap(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(v0.fidelity(&v1).unwrap(), 0.0, epsilon = 1e-10);
        let nbar = 0.1;
        let th = QuantumState::thermal(40, nbar).unwrap();
        let vac = QuantumState::fock(40, 0).unwrap();
        assert_abs_diff_eq!(th.fidelity(&vac).unwrap(), 1.0 / (1.0 + nbar), epsilon = 1e-9);
        let mut e0 = vec![c(0.0, 0.0); 40];
        e0[0] = c(1.0, 0.0);
        assert_abs_diff_eq!(th.fidelity_pure(&e0), 1.0 / (1.0 + nbar), epsilon = 1e-9);
        assert!(th.fidelity(&v0).is_err());
    }

    #[test]
    fn state_validation() {
        let bad = ComplexMatrix::from_real_rows(&[&[1.2, 0.0], &[0.0, -0.2]]);
        assert!(QuantumState::new(vec![2], bad).is_err());
        let tiny_neg = ComplexMatrix::from_real_rows(&[&[1.0 + 5e-10, 0.0], &[0.0, -5e-10]]);
        let s = QuantumState::new(vec![2], tiny_neg).unwrap();
        assert!(s.matrix().eigvalsh()[0] >= 0.0);
        assert_abs_diff_eq!(s.matrix().trace().re, 1.0, epsilon = 1e-15);
        let nonherm = ComplexMatrix::from_real_rows(&[&[0.5, 0.1], &[0.0, 0.5]]);
        assert!(QuantumState::new(vec![2], nonherm).is_err());
    }
}
