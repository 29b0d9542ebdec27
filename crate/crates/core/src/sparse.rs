//! Compressed sparse rows and a Jacobi-preconditioned BiCGStab.
//!
//! Inner products are accumulated sequentially in index order so a solve is
//! bit-reproducible regardless of the thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Square matrix from per-row `(column, value)` lists.
    pub fn from_rows(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        assert_eq!(rows.len(), n, "one row list per row");
        let mut row_ptr = Vec::with_capacity(n + 1);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for row in rows {
            for (c, v) in row {
                assert!(c < n, "column {c} out of range");
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).filter(|e| e.0 == j).map(|e| e.1).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        });
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solves `A x = b` to relative residual `tol`, starting from `x = 0`.
pub fn bicgstab(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, KrylovStats)> {
    let n = a.dim();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((
            x,
            KrylovStats {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|d| if *d != 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let precond = |v: &[f64], out: &mut [f64]| {
        for i in 0..n {
            out[i] = inv_diag[i] * v[i];
        }
    };

    let mut r = b.to_vec();
    let r_hat = r.clone();
    let mut rho = 1.0;
    let mut alpha = 1.0;
    let mut omega = 1.0;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut rel = 1.0;

    for it in 1..=max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() < 1e-300 || omega == 0.0 {
            // shadow residual broke down; restart from the current iterate
            return restart(a, b, x, tol, max_iter - it, bnorm);
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        precond(&p, &mut y);
        a.matvec_into(&y, &mut v);
        let rv = dot(&r_hat, &v);
        if rv == 0.0 {
            break;
        }
        alpha = rho / rv;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) / bnorm <= tol {
            for i in 0..n {
                x[i] += alpha * y[i];
            }
            rel = true_residual(a, b, &x) / bnorm;
            if rel <= tol {
                return Ok((
                    x,
                    KrylovStats {
                        iterations: it,
                        relative_residual: rel,
                    },
                ));
            }
            return restart(a, b, x, tol, max_iter - it, bnorm);
        }
        precond(&s, &mut z);
        a.matvec_into(&z, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        for i in 0..n {
            x[i] += alpha * y[i] + omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
        rel = norm(&r) / bnorm;
        if rel <= tol {
            let true_rel = true_residual(a, b, &x) / bnorm;
            if true_rel <= tol {
                return Ok((
                    x,
                    KrylovStats {
                        iterations: it,
                        relative_residual: true_rel,
                    },
                ));
            }
            return restart(a, b, x, tol, max_iter - it, bnorm);
        }
    }
    Err(Error::LinearSolveFailure {
        iterations: max_iter,
        relative_residual: rel,
    })
}

fn true_residual(a: &CsrMatrix, b: &[f64], x: &[f64]) -> f64 {
    let ax = a.matvec(x);
    b.iter()
        .zip(&ax)
        .map(|(bi, yi)| (bi - yi).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Continues from `x` by solving for the correction against the true residual.
fn restart(
    a: &CsrMatrix,
    b: &[f64],
    x: Vec<f64>,
    tol: f64,
    budget: usize,
    bnorm: f64,
) -> Result<(Vec<f64>, KrylovStats)> {
    let ax = a.matvec(&x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, yi)| bi - yi).collect();
    let rel = norm(&r) / bnorm;
    if rel <= tol {
        return Ok((
            x,
            KrylovStats {
                iterations: 0,
                relative_residual: rel,
            },
        ));
    }
    if budget == 0 {
        return Err(Error::LinearSolveFailure {
            iterations: 0,
            relative_residual: rel,
        });
    }
    let (dx, stats) = bicgstab(a, &r, tol / rel, budget).map_err(|e| match e {
        Error::LinearSolveFailure { iterations, .. } => Error::LinearSolveFailure {
            iterations,
            relative_residual: rel,
        },
        other => other,
    })?;
    let x: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
    let rel = true_residual(a, b, &x) / bnorm;
    Ok((
        x,
        KrylovStats {
            iterations: stats.iterations,
            relative_residual: rel,
        },
    ))
}
