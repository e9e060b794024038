//! Time-dependent Lindblad generators acting on row-major density matrices.
//!
//! Operators are stored as coordinate lists. Every quantity that varies in
//! time is a sum `Σ_k c_k(t) S_k` of fixed sparse matrices with scalar
//! coefficient functions; the terms share one merged sparsity pattern so a
//! whole operator is evaluated with a single pass per time.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::linalg::ComplexMatrix;

pub type Coeff = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

pub fn constant(z: Complex64) -> Coeff {
    Arc::new(move |_| z)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    dim: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseOp {
    pub fn from_dense(m: &ComplexMatrix) -> Self {
        let mut entries = Vec::new();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let v = m[(i, j)];
                if v.norm_sqr() > 0.0 {
                    entries.push((i, j, v));
                }
            }
        }
        Self { dim: m.rows(), entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }
}

/// Σ_k c_k(t) S_k over a shared pattern.
#[derive(Clone)]
pub struct TimeOp {
    dim: usize,
    pattern: Vec<(usize, usize)>,
    terms: Vec<(Coeff, Vec<(usize, Complex64)>)>,
}

impl TimeOp {
    pub fn new(dim: usize, terms: Vec<(Coeff, ComplexMatrix)>) -> Self {
        let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (_, m) in &terms {
            assert_eq!(m.rows(), dim);
            for (i, j, _) in SparseOp::from_dense(m).entries {
                let n = index.len();
                index.entry((i, j)).or_insert(n);
            }
        }
        let mut pattern = vec![(0, 0); index.len()];
        for (&ij, &k) in &index {
            pattern[k] = ij;
        }
        let terms = terms
            .into_iter()
            .map(|(cf, m)| {
                let e = SparseOp::from_dense(&m).entries.into_iter().map(|(i, j, v)| (index[&(i, j)], v)).collect();
                (cf, e)
            })
            .collect();
        Self { dim, pattern, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.pattern.len()
    }

    /// Values on the shared pattern at time `t`.
    pub fn values(&self, t: f64) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); self.pattern.len()];
        for (cf, e) in &self.terms {
            let c = cf(t);
            if c.norm_sqr() == 0.0 {
                continue;
            }
            for &(k, x) in e {
                v[k] += c * x;
            }
        }
        v
    }

    pub fn dense(&self, t: f64) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim, self.dim);
        for (&(i, j), v) in self.pattern.iter().zip(self.values(t)) {
            m[(i, j)] += v;
        }
        m
    }

    /// out += s · O x
    pub fn left_mul_acc(&self, vals: &[Complex64], x: &[Complex64], s: Complex64, out: &mut [Complex64]) {
        let d = self.dim;
        for (&(i, k), &v) in self.pattern.iter().zip(vals) {
            let c = s * v;
            let (dst, src) = (&mut out[i * d..(i + 1) * d], &x[k * d..(k + 1) * d]);
            for (o, xi) in dst.iter_mut().zip(src) {
                *o += c * xi;
            }
        }
    }

    /// out += s · x O†
    pub fn right_mul_adjoint_acc(&self, vals: &[Complex64], x: &[Complex64], s: Complex64, out: &mut [Complex64]) {
        let d = self.dim;
        for (&(j, k), &v) in self.pattern.iter().zip(vals) {
            let c = s * v.conj();
            for i in 0..d {
                out[i * d + j] += c * x[i * d + k];
            }
        }
    }
}

fn product_coeff(a: &Coeff, b: &Coeff, scale: f64) -> Coeff {
    let (a, b) = (a.clone(), b.clone());
    Arc::new(move |t| a(t).conj() * b(t) * scale)
}

/// L(ρ) = −i[H, ρ] + Σ_j (J_j ρ J_j† − ½{J_j†J_j, ρ}), evaluated as
/// Kρ + ρK† + Σ_j J_j ρ J_j† with K = −iH − ½ Σ_j J_j†J_j.
#[derive(Clone)]
pub struct Liouvillian {
    dim: usize,
    k: TimeOp,
    jumps: Vec<TimeOp>,
}

impl Liouvillian {
    /// `hamiltonian` and each jump are sums of coefficient × matrix terms.
    /// `extra_k` adds non-Hermitian pieces to K directly (used for the
    /// cascade coupling, which is not of plain Lindblad form term by term).
    pub fn new(
        dim: usize,
        hamiltonian: Vec<(Coeff, ComplexMatrix)>,
        jumps: Vec<Vec<(Coeff, ComplexMatrix)>>,
        extra_k: Vec<(Coeff, ComplexMatrix)>,
    ) -> Self {
        let mut kterms: Vec<(Coeff, ComplexMatrix)> = Vec::new();
        for (cf, h) in hamiltonian {
            let cf2 = cf.clone();
            kterms.push((Arc::new(move |t| Complex64::new(0.0, -1.0) * cf2(t)), h));
        }
        for jump in &jumps {
            for (ca, a) in jump {
                let ad = a.adjoint();
                for (cb, b) in jump {
                    kterms.push((product_coeff(ca, cb, -0.5), ad.matmul(b)));
                }
            }
        }
        kterms.extend(extra_k);
        let k = TimeOp::new(dim, kterms);
        let jumps = jumps.into_iter().map(|j| TimeOp::new(dim, j)).collect();
        Self { dim, k, jumps }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Evaluate the time-dependent pieces once; the returned frame can then be
    /// applied to several blocks.
    pub fn at(&self, t: f64) -> Frame<'_> {
        Frame {
            l: self,
            k: self.k.values(t),
            jumps: self.jumps.iter().map(|j| j.values(t)).collect(),
        }
    }
}

pub struct Frame<'a> {
    l: &'a Liouvillian,
    k: Vec<Complex64>,
    jumps: Vec<Vec<Complex64>>,
}

impl Frame<'_> {
    /// out = L(x); `scratch` must hold dim² entries.
    pub fn apply(&self, x: &[Complex64], out: &mut [Complex64], scratch: &mut [Complex64]) {
        let one = Complex64::new(1.0, 0.0);
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        self.l.k.left_mul_acc(&self.k, x, one, out);
        self.l.k.right_mul_adjoint_acc(&self.k, x, one, out);
        for (op, vals) in self.l.jumps.iter().zip(&self.jumps) {
            scratch.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
            op.left_mul_acc(vals, x, one, scratch);
            op.right_mul_adjoint_acc(vals, scratch, one, out);
        }
    }
}
