//! Brute-force and finite-difference references for the test suites.
//!
//! Nothing here calls into the code it checks: subset sums stand in for the
//! coefficient recurrence, the embedding stands in for the closed-form metric,
//! and the manufactured solutions are built from closed forms.

use rand::Rng;

use crate::error::{Error, Result};
use crate::hessop::{ChartBox, Grid, NodalSource, ScalarField};
use crate::hypgeom::{lorentz_inner, PolarChart};
use crate::linalg::SymMat;
use crate::symfunc::QuotientSpec;

/// Subset-enumeration `sigma_k`; `n <= 12`.
pub fn sigma_bruteforce(lambda: &[f64], k: usize) -> f64 {
    let n = lambda.len();
    assert!(n <= 12, "enumeration limited to n <= 12");
    if k == 0 {
        return 1.0;
    }
    if k > n {
        return 0.0;
    }
    let mut total = 0.0;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let mut prod = 1.0;
        for (i, x) in lambda.iter().enumerate() {
            if mask & (1 << i) != 0 {
                prod *= x;
            }
        }
        total += prod;
    }
    total
}

/// `sigma_k(lambda | i)` by deleting entry `i` and enumerating.
pub fn sigma_partial_bruteforce(lambda: &[f64], k: usize, i: usize) -> f64 {
    let rest: Vec<f64> = lambda
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, x)| *x)
        .collect();
    sigma_bruteforce(&rest, k)
}

/// `n choose k` as a float.
pub fn choose(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdOrder {
    First,
    Second,
}

/// Step shrink factor and maximum number of shrinks on a domain exit.
const FD_SHRINK: f64 = 0.25;
const FD_MAX_SHRINKS: usize = 4;

/// Centered difference of `f` along `v` at `u` (step `1e-6` for the first
/// derivative, `1e-4` for the second), Richardson-extrapolated once.
pub fn fd_derivative<F>(f: F, u: &SymMat, v: &SymMat, order: FdOrder) -> Result<f64>
where
    F: Fn(&SymMat) -> Result<f64>,
{
    let mut t = match order {
        FdOrder::First => 1e-6,
        FdOrder::Second => 1e-4,
    };
    let center = match order {
        FdOrder::First => 0.0,
        FdOrder::Second => f(u)?,
    };
    let diff = |t: f64| -> Result<f64> {
        let plus = f(&u.axpy(t, v))?;
        let minus = f(&u.axpy(-t, v))?;
        Ok(match order {
            FdOrder::First => (plus - minus) / (2.0 * t),
            FdOrder::Second => (plus - 2.0 * center + minus) / (t * t),
        })
    };
    for _ in 0..=FD_MAX_SHRINKS {
        match (diff(t), diff(0.5 * t)) {
            (Ok(coarse), Ok(fine)) => return Ok((4.0 * fine - coarse) / 3.0),
            _ => t *= FD_SHRINK,
        }
    }
    Err(Error::FdDomainExit(FD_MAX_SHRINKS))
}

fn determinant(mut m: Vec<f64>, n: usize) -> f64 {
    let mut det = 1.0;
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&x, &y| m[x * n + c].abs().total_cmp(&m[y * n + c].abs()))
            .unwrap();
        if m[piv * n + c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            for j in 0..n {
                m.swap(c * n + j, piv * n + j);
            }
            det = -det;
        }
        let d = m[c * n + c];
        det *= d;
        for r in (c + 1)..n {
            let f = m[r * n + c] / d;
            for j in c..n {
                m[r * n + j] -= f * m[c * n + j];
            }
        }
    }
    det
}

/// Sum of the `k x k` principal minors of `u`, which is `sigma_k` of its eigenvalues.
pub fn principal_minor_sum(u: &SymMat, k: usize) -> f64 {
    let n = u.dim();
    assert!(n <= 12, "enumeration limited to n <= 12");
    if k == 0 {
        return 1.0;
    }
    let mut total = 0.0;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let sub: Vec<f64> = idx
            .iter()
            .flat_map(|&i| idx.iter().map(move |&j| (i, j)))
            .map(|(i, j)| u.get(i, j))
            .collect();
        total += determinant(sub, k);
    }
    total
}

/// `(sigma_k / sigma_l)^(1/(k-l))` of the eigenvalues of `u` from principal minors,
/// with no eigendecomposition. Outside `Gamma_k` this is an error.
pub fn quotient_by_minors(u: &SymMat, spec: &QuotientSpec) -> Result<f64> {
    let sig: Vec<f64> = (0..=spec.k).map(|j| principal_minor_sum(u, j)).collect();
    if sig[1..].iter().any(|s| !(*s > 0.0)) {
        return Err(Error::Inadmissible("matrix outside the cone".into()));
    }
    Ok((sig[spec.k] / sig[spec.l]).powf(1.0 / (spec.k - spec.l) as f64))
}

const PULLBACK_STEP: f64 = 1e-5;

/// `d embed / d xi^a` by a centered difference.
fn embed_tangent(chart: &PolarChart, xi: &[f64], a: usize, h: f64) -> Vec<f64> {
    let mut p = xi.to_vec();
    let mut q = xi.to_vec();
    p[a] += h;
    q[a] -= h;
    let (xp, xq) = (chart.embed(&p).0, chart.embed(&q).0);
    xp.iter().zip(&xq).map(|(x, y)| (x - y) / (2.0 * h)).collect()
}

/// Full metric `<d_i X, d_j X>_L` from finite differences of the embedding, row-major.
pub fn metric_pullback(chart: &PolarChart, xi: &[f64]) -> Vec<f64> {
    let n = chart.dim();
    let tangents: Vec<Vec<f64>> = (0..n)
        .map(|a| embed_tangent(chart, xi, a, PULLBACK_STEP))
        .collect();
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            g[i * n + j] = lorentz_inner(&tangents[i], &tangents[j]);
        }
    }
    g
}

fn invert(a: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&x, &y| m[x * n + c].abs().total_cmp(&m[y * n + c].abs()))
            .unwrap();
        for j in 0..n {
            m.swap(c * n + j, piv * n + j);
            inv.swap(c * n + j, piv * n + j);
        }
        let d = m[c * n + c];
        for j in 0..n {
            m[c * n + j] /= d;
            inv[c * n + j] /= d;
        }
        for r in 0..n {
            if r != c {
                let f = m[r * n + c];
                for j in 0..n {
                    m[r * n + j] -= f * m[c * n + j];
                    inv[r * n + j] -= f * inv[c * n + j];
                }
            }
        }
    }
    inv
}

/// `Gamma^m_ij = g^{mp} <d_i d_j X, d_p X>_L` with the embedding derivatives
/// taken by Richardson-extrapolated differences. Stored `[m][i][j]`.
pub fn fd_christoffel(chart: &PolarChart, xi: &[f64]) -> Vec<f64> {
    let n = chart.dim();
    let h = 1e-3;
    let second = |i: usize, j: usize, h: f64| -> Vec<f64> {
        let shifted = |si: f64, sj: f64| {
            let mut p = xi.to_vec();
            p[i] += si;
            p[j] += sj;
            chart.embed(&p).0
        };
        if i == j {
            let (a, b, c) = (shifted(h, 0.0), shifted(0.0, 0.0), shifted(-h, 0.0));
            (0..a.len()).map(|r| (a[r] - 2.0 * b[r] + c[r]) / (h * h)).collect()
        } else {
            let (pp, pm, mp, mm) = (
                shifted(h, h),
                shifted(h, -h),
                shifted(-h, h),
                shifted(-h, -h),
            );
            (0..pp.len())
                .map(|r| (pp[r] - pm[r] - mp[r] + mm[r]) / (4.0 * h * h))
                .collect()
        }
    };
    let richardson = |i: usize, j: usize| -> Vec<f64> {
        let (c, f) = (second(i, j, h), second(i, j, 0.5 * h));
        c.iter().zip(&f).map(|(c, f)| (4.0 * f - c) / 3.0).collect()
    };
    let tangents: Vec<Vec<f64>> = (0..n)
        .map(|a| {
            let (c, f) = (embed_tangent(chart, xi, a, h), embed_tangent(chart, xi, a, 0.5 * h));
            c.iter().zip(&f).map(|(c, f)| (4.0 * f - c) / 3.0).collect()
        })
        .collect();
    let ginv = invert(&metric_pullback(chart, xi), n);
    let mut gamma = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            let xij = richardson(i, j);
            let lowered: Vec<f64> = tangents.iter().map(|t| lorentz_inner(&xij, t)).collect();
            for m in 0..n {
                gamma[(m * n + i) * n + j] = (0..n).map(|p| ginv[m * n + p] * lowered[p]).sum();
            }
        }
    }
    gamma
}

/// Conservative five-point Laplace-Beltrami `(1/sqrt g) d_a (sqrt g g^aa d_a u)`
/// at an interior node, with the metric at the half-points taken from the
/// embedding pullback. Off-diagonal metric terms are ignored; the pullback check
/// shows they vanish for the polar chart.
pub fn discrete_laplace_beltrami(grid: &Grid, u: &[f64], node: usize) -> f64 {
    let n = grid.dim();
    let chart = grid.chart();
    let xi = grid.coords(node);
    let flux_coeff = |x: &[f64], a: usize| -> f64 {
        let g = metric_pullback(chart, x);
        let det: f64 = (0..n).map(|i| g[i * n + i]).product();
        det.sqrt() / g[a * n + a]
    };
    let g0 = metric_pullback(chart, &xi);
    let sqrt_det: f64 = (0..n).map(|i| g0[i * n + i]).product::<f64>().sqrt();
    let mut total = 0.0;
    for a in 0..n {
        let h = grid.spacing()[a];
        let s = grid.stride(a);
        let mut up = xi.clone();
        up[a] += 0.5 * h;
        let mut down = xi.clone();
        down[a] -= 0.5 * h;
        total += (flux_coeff(&up, a) * (u[node + s] - u[node])
            - flux_coeff(&down, a) * (u[node] - u[node - s]))
            / (h * h);
    }
    total / sqrt_det
}

/// Radial manufactured solution `u* = -c (cosh R_out - cosh rho)`.
///
/// Its frame Hessian is `c cosh(rho) I`, so `U[u*] = c cosh(rho) (tau n - 1) I`
/// and the right-hand side is known in closed form. The Dirichlet data of `u*`
/// are zero on the outer arc only.
#[derive(Debug, Clone)]
pub struct ManufacturedCase {
    pub spec: QuotientSpec,
    pub grid: Grid,
    pub c: f64,
    pub r_out: f64,
    pub u_exact: ScalarField,
    /// Closed-form `f*` at every node.
    pub f_exact: NodalSource,
}

/// Builds the manufactured case on the grid of `bounds` with `nodes` per axis.
pub fn make_manufactured(
    spec: QuotientSpec,
    chart: PolarChart,
    bounds: ChartBox,
    nodes: usize,
    c: f64,
) -> Result<ManufacturedCase> {
    let grid = Grid::uniform(chart, bounds, nodes)?;
    manufactured_on(spec, &grid, c)
}

pub fn manufactured_on(spec: QuotientSpec, grid: &Grid, c: f64) -> Result<ManufacturedCase> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Inadmissible(format!(
            "manufactured scale c = {c} leaves the cone (need c > 0)"
        )));
    }
    let n = spec.n;
    let (_, r_out) = grid.bounds().radial_range();
    // all eigenvalues of U[u*] equal this, which lies in Gamma_n iff it is positive
    let eig = |rho: f64| c * rho.cosh() * (spec.tau * n as f64 - 1.0);
    let ratio = choose(n, spec.k) / choose(n, spec.l);
    let m = (spec.k - spec.l) as i32;
    let mut u = Vec::with_capacity(grid.len());
    let mut f = Vec::with_capacity(grid.len());
    for p in 0..grid.len() {
        let rho = grid.coords(p)[n - 1];
        let mu = eig(rho);
        if !(mu > 0.0) {
            return Err(Error::Inadmissible(format!(
                "U[u*] eigenvalue {mu:e} at radius {rho}"
            )));
        }
        u.push(-c * (r_out.cosh() - rho.cosh()));
        f.push(ratio * mu.powi(m));
    }
    Ok(ManufacturedCase {
        spec,
        grid: grid.clone(),
        c,
        r_out,
        u_exact: ScalarField { values: u },
        f_exact: NodalSource(f),
    })
}

impl ManufacturedCase {
    /// `u*` plus `eps c w`, where `w` vanishes on the boundary; keeps the Dirichlet data.
    pub fn perturbed(&self, w: &ScalarField, eps: f64) -> ScalarField {
        ScalarField {
            values: self
                .u_exact
                .values
                .iter()
                .zip(&w.values)
                .map(|(u, w)| u + eps * self.c * w)
                .collect(),
        }
    }
}

/// Uniform sample of `[-1, 1)^n`.
pub fn random_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Rejection sample of `Gamma_k` from `[-1, 2)^n`, scaled log-uniformly in `[0.1, 10)`.
/// Membership is decided by subset enumeration.
pub fn random_gamma_k<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<f64> {
    let scale = 10f64.powf(rng.gen_range(-1.0..1.0));
    loop {
        let lam: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..2.0)).collect();
        if (1..=k).all(|j| sigma_bruteforce(&lam, j) > 0.0) {
            return lam.iter().map(|x| x * scale).collect();
        }
    }
}

/// Random orthogonal matrix (row-major) by Gram-Schmidt on uniform vectors.
pub fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
    while q.len() < n {
        let mut v = random_vector(rng, n);
        for b in &q {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            q.push(v.iter().map(|x| x / norm).collect());
        }
    }
    (0..n * n).map(|i| q[i % n][i / n]).collect()
}

/// `Q diag(lambda) Q^T` with a random orthogonal `Q`.
pub fn random_with_spectrum<R: Rng>(rng: &mut R, lambda: &[f64]) -> SymMat {
    let n = lambda.len();
    let q = random_orthogonal(rng, n);
    SymMat::from_fn(n, |i, j| (0..n).map(|r| q[i * n + r] * lambda[r] * q[j * n + r]).sum())
}

/// Random symmetric matrix with entries in `[-1, 1)`.
pub fn random_symmetric<R: Rng>(rng: &mut R, n: usize) -> SymMat {
    let mut m = SymMat::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            m.set(i, j, rng.gen_range(-1.0..1.0));
        }
    }
    m
}
