//! Small dense symmetric matrices and their eigen-decomposition.
//!
//! Matrices here are at most 8x8 (eigenvalue vectors of the quotient operator),
//! so a cyclic Jacobi sweep is both accurate and cheap. The sweep order is fixed,
//! which makes every decomposition bit-reproducible for a given input.

use crate::error::{Error, Result};

/// Largest dimension accepted by the symmetric-function calculus.
pub const MAX_DIM: usize = 8;

/// Symmetric matrix stored as its packed lower triangle, so `A_ij == A_ji` holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMat {
    n: usize,
    data: Vec<f64>,
}

#[inline]
fn packed(i: usize, j: usize) -> usize {
    let (r, c) = if i >= j { (i, j) } else { (j, i) };
    r * (r + 1) / 2 + c
}

impl SymMat {
    pub fn zeros(n: usize) -> Self {
        SymMat {
            n,
            data: vec![0.0; n * (n + 1) / 2],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds a matrix from `f(i, j)` evaluated on the lower triangle only.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                m.data[packed(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Symmetrizes a dense row-major matrix as `(A + A^T) / 2`.
    pub fn from_dense(n: usize, a: &[f64]) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "dense matrix has {} entries, expected {}",
                a.len(),
                n * n
            )));
        }
        Ok(Self::from_fn(n, |i, j| 0.5 * (a[i * n + j] + a[j * n + i])))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[packed(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[packed(i, j)] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += self.get(i, j).powi(2);
            }
        }
        s.sqrt()
    }

    pub fn scaled(&self, t: f64) -> Self {
        SymMat {
            n: self.n,
            data: self.data.iter().map(|v| v * t).collect(),
        }
    }

    /// `self + t * other`.
    pub fn axpy(&self, t: f64, other: &SymMat) -> Self {
        assert_eq!(self.n, other.n, "dimension mismatch");
        SymMat {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + t * b)
                .collect(),
        }
    }

    /// Frobenius inner product `sum_ij A_ij B_ij`.
    pub fn contract(&self, other: &SymMat) -> f64 {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += self.get(i, j) * other.get(i, j);
            }
        }
        s
    }

    /// `v^T A v`.
    pub fn quad(&self, v: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += v[i] * self.get(i, j) * v[j];
            }
        }
        s
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = self.get(i, j);
            }
        }
        a
    }

    /// `Q^T A Q` for a dense row-major `Q`.
    pub fn congruence_t(&self, q: &[f64]) -> SymMat {
        let n = self.n;
        let a = self.to_dense();
        let mut aq = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                aq[i * n + j] = (0..n).map(|m| a[i * n + m] * q[m * n + j]).sum();
            }
        }
        SymMat::from_fn(n, |i, j| (0..n).map(|m| q[m * n + i] * aq[m * n + j]).sum())
    }

    pub fn eigen(&self) -> SpectralDecomp {
        SpectralDecomp::new(self)
    }
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a [`SymMat`].
#[derive(Debug, Clone)]
pub struct SpectralDecomp {
    pub eigenvalues: Vec<f64>,
    /// Row-major `n x n`; column `j` is the eigenvector of `eigenvalues[j]`.
    pub vectors: Vec<f64>,
}

impl SpectralDecomp {
    pub fn new(a: &SymMat) -> Self {
        let n = a.dim();
        let mut m = a.to_dense();
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[i * n + i] = 1.0;
        }
        let norm = a.frobenius();
        let threshold = 1e-14 * norm;

        for _sweep in 0..64 {
            let mut off = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += 2.0 * m[p * n + q] * m[p * n + q];
                }
            }
            if off.sqrt() <= threshold {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = m[p * n + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let app = m[p * n + p];
                    let aqq = m[q * n + q];
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for r in 0..n {
                        let arp = m[r * n + p];
                        let arq = m[r * n + q];
                        m[r * n + p] = c * arp - s * arq;
                        m[r * n + q] = s * arp + c * arq;
                    }
                    for r in 0..n {
                        let apr = m[p * n + r];
                        let aqr = m[q * n + r];
                        m[p * n + r] = c * apr - s * aqr;
                        m[q * n + r] = s * apr + c * aqr;
                    }
                    m[p * n + q] = 0.0;
                    m[q * n + p] = 0.0;
                    for r in 0..n {
                        let vrp = v[r * n + p];
                        let vrq = v[r * n + q];
                        v[r * n + p] = c * vrp - s * vrq;
                        v[r * n + q] = s * vrp + c * vrq;
                    }
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        // stable sort keeps the sweep's column order on ties
        order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]));
        let eigenvalues = order.iter().map(|&i| m[i * n + i]).collect();
        let mut vectors = vec![0.0; n * n];
        for (dst, &src) in order.iter().enumerate() {
            for r in 0..n {
                vectors[r * n + dst] = v[r * n + src];
            }
        }
        SpectralDecomp {
            eigenvalues,
            vectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, j: usize) -> Vec<f64> {
        let n = self.dim();
        (0..n).map(|r| self.vectors[r * n + j]).collect()
    }

    /// `Q diag(d) Q^T`.
    pub fn compose(&self, d: &[f64]) -> SymMat {
        let n = self.dim();
        let q = &self.vectors;
        SymMat::from_fn(n, |i, j| (0..n).map(|m| q[i * n + m] * d[m] * q[j * n + m]).sum())
    }

    /// `max |Q Lambda Q^T - A|`.
    pub fn reconstruction_error(&self, a: &SymMat) -> f64 {
        let r = self.compose(&self.eigenvalues);
        r.axpy(-1.0, a).max_abs()
    }

    /// `max |Q^T Q - I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let n = self.dim();
        let q = &self.vectors;
        let mut e: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|r| q[r * n + i] * q[r * n + j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                e = e.max((dot - target).abs());
            }
        }
        e
    }
}
