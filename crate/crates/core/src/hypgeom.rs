//! The hyperboloid `H^n(1) = { <X,X>_L = -1, x_{n+1} > 0 }` in Lorentz-Minkowski space,
//! described by geodesic polar coordinates `xi = (xi^1, ..., xi^n)`.
//!
//! `xi^n` is the radial coordinate (geodesic distance from the pole `(0, ..., 0, 1)`);
//! `xi^1 .. xi^{n-1}` are angles. The metric is diagonal:
//! `sigma_ii = sinh^2(xi^n) prod_{m<i} cos^2(xi^m)` for `i < n` and `sigma_nn = 1`.
//!
//! Indices are zero-based throughout, so the radial axis is `n - 1`.

use crate::error::{Error, Result};

/// Smallest admissible value of any `cos(xi^m)` factor appearing in the metric.
pub const MIN_COS_FACTOR: f64 = 0.1;

/// `sum_{i<=n} X_i Y_i - X_{n+1} Y_{n+1}`.
pub fn lorentz_inner(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "dimension mismatch");
    let last = x.len() - 1;
    let space: f64 = x[..last].iter().zip(&y[..last]).map(|(a, b)| a * b).sum();
    space - x[last] * y[last]
}

/// A point of `R^{n+1}_1` produced by the chart.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzPoint(pub Vec<f64>);

impl LorentzPoint {
    pub fn pole(n: usize) -> Self {
        let mut x = vec![0.0; n + 1];
        x[n] = 1.0;
        LorentzPoint(x)
    }

    /// `<X,X>_L + 1`; zero on the hyperboloid.
    pub fn constraint(&self) -> f64 {
        lorentz_inner(&self.0, &self.0) + 1.0
    }

    pub fn on_hyperboloid(&self, tol: f64) -> bool {
        self.constraint().abs() <= tol && *self.0.last().unwrap() > 0.0
    }
}

/// Metric data at one chart point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricAt {
    pub xi: Vec<f64>,
    /// `sigma_ii`.
    pub diag: Vec<f64>,
    /// `sigma^{ii}`.
    pub inv_diag: Vec<f64>,
    /// `1 / sqrt(sigma_ii)`: coordinate-to-orthonormal-frame scale.
    pub frame_scale: Vec<f64>,
}

/// Christoffel symbols `Gamma^m_{ij}`, stored `[m][i][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    #[inline]
    pub fn get(&self, m: usize, i: usize, j: usize) -> f64 {
        self.data[(m * self.n + i) * self.n + j]
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// The polar chart of `H^n(1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolarChart {
    n: usize,
}

impl PolarChart {
    pub fn new(n: usize) -> Result<Self> {
        if !(2..=4).contains(&n) {
            return Err(Error::InvalidInput(format!(
                "polar chart supports 2 <= n <= 4, got {n}"
            )));
        }
        Ok(PolarChart { n })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn radial_axis(&self) -> usize {
        self.n - 1
    }

    /// Largest `|xi^m|` allowed on the angular axes that enter the metric as cosine factors.
    pub fn max_latitude() -> f64 {
        MIN_COS_FACTOR.acos()
    }

    /// Checks that `xi` lies in the admissible region: `xi^n >= r_min > 0` and every
    /// cosine factor of the metric is at least [`MIN_COS_FACTOR`].
    pub fn check_admissible(&self, xi: &[f64], r_min: f64) -> Result<()> {
        self.check_len(xi)?;
        if !(r_min > 0.0) {
            return Err(Error::InvalidInput(format!("r_min = {r_min} must be positive")));
        }
        let r = xi[self.n - 1];
        if !(r >= r_min) {
            return Err(Error::InvalidInput(format!(
                "radial coordinate {r} below r_min = {r_min}"
            )));
        }
        // cos(xi^m) factors appear for m < n - 2 (zero-based)
        for m in 0..self.n.saturating_sub(2) {
            if xi[m].cos() < MIN_COS_FACTOR {
                return Err(Error::InvalidInput(format!(
                    "angular coordinate xi^{} = {} makes a metric factor cos < {MIN_COS_FACTOR}",
                    m + 1,
                    xi[m]
                )));
            }
        }
        Ok(())
    }

    fn check_len(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "chart point has {} coordinates, expected {}",
                xi.len(),
                self.n
            )));
        }
        Ok(())
    }

    /// Lorentzian coordinates of a chart point:
    /// `x^1 = cos xi^1 ... cos xi^{n-1} sinh xi^n`, ..., `x^n = sin xi^1 sinh xi^n`,
    /// `x^{n+1} = cosh xi^n`.
    pub fn embed(&self, xi: &[f64]) -> LorentzPoint {
        let n = self.n;
        assert_eq!(xi.len(), n, "chart point dimension");
        let r = xi[n - 1];
        let (sh, ch) = (r.sinh(), r.cosh());
        let mut x = vec![0.0; n + 1];
        // x^j (one-based) = prod_{m=1}^{n-j} cos xi^m * (sin xi^{n-j+1} if j >= 2) * sinh xi^n
        for j in 1..=n {
            let mut v = sh;
            for m in 0..(n - j) {
                v *= xi[m].cos();
            }
            if j >= 2 {
                v *= xi[n - j].sin();
            }
            x[j - 1] = v;
        }
        x[n] = ch;
        LorentzPoint(x)
    }

    pub fn metric_at(&self, xi: &[f64]) -> MetricAt {
        let n = self.n;
        let diag = self.metric_diag(xi);
        let inv_diag: Vec<f64> = diag.iter().map(|g| 1.0 / g).collect();
        let frame_scale = diag.iter().map(|g| 1.0 / g.sqrt()).collect();
        debug_assert_eq!(diag.len(), n);
        MetricAt {
            xi: xi.to_vec(),
            diag,
            inv_diag,
            frame_scale,
        }
    }

    fn metric_diag(&self, xi: &[f64]) -> Vec<f64> {
        let n = self.n;
        let sh2 = xi[n - 1].sinh().powi(2);
        let mut diag = vec![1.0; n];
        let mut prod = sh2;
        for i in 0..n - 1 {
            if i > 0 {
                prod *= xi[i - 1].cos().powi(2);
            }
            diag[i] = prod;
        }
        diag
    }

    /// `d sigma_ii / d xi^a`, stored `[a][i]`.
    fn metric_diag_derivs(&self, xi: &[f64]) -> Vec<f64> {
        let n = self.n;
        let g = self.metric_diag(xi);
        let r = xi[n - 1];
        let coth = r.cosh() / r.sinh();
        let mut d = vec![0.0; n * n];
        for i in 0..n - 1 {
            d[(n - 1) * n + i] = 2.0 * coth * g[i];
            for a in 0..i {
                d[a * n + i] = -2.0 * xi[a].tan() * g[i];
            }
        }
        d
    }

    /// Closed-form Christoffel symbols of the diagonal metric.
    pub fn christoffel(&self, xi: &[f64]) -> Christoffel {
        let n = self.n;
        let g = self.metric_diag(xi);
        let dg = self.metric_diag_derivs(xi);
        let mut data = vec![0.0; n * n * n];
        for m in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    if m == j {
                        s += dg[i * n + m];
                    }
                    if m == i {
                        s += dg[j * n + m];
                    }
                    if i == j {
                        s -= dg[m * n + i];
                    }
                    data[(m * n + i) * n + j] = 0.5 * s / g[m];
                }
            }
        }
        Christoffel { n, data }
    }
}

/// Richardson-extrapolated centered derivative of a vector-valued map along axis `a`.
fn richardson_partial<F>(f: &F, xi: &[f64], a: usize, h: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let central = |step: f64| -> Vec<f64> {
        let mut p = xi.to_vec();
        let mut q = xi.to_vec();
        p[a] += step;
        q[a] -= step;
        f(&p)
            .iter()
            .zip(f(&q))
            .map(|(x, y)| (x - y) / (2.0 * step))
            .collect()
    };
    let d1 = central(h);
    let d2 = central(0.5 * h);
    d1.iter().zip(d2).map(|(a, b)| (4.0 * b - a) / 3.0).collect()
}

/// Curvature self-check results.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureCheck {
    /// `max |R_ijkl + (sigma_ik sigma_jl - sigma_il sigma_jk)|`.
    pub residual: f64,
    /// `max |R_ijkl + R_jikl|`.
    pub antisymmetry: f64,
    /// Sectional curvatures `R_ijij / (sigma_ii sigma_jj)` for `i < j`.
    pub sectional: Vec<f64>,
    /// `R_ijkl` with all indices lowered, stored `[i][j][k][l]`.
    pub riemann: Vec<f64>,
}

/// Step used for the curvature finite differences.
pub const CURVATURE_STEP: f64 = 1e-4;

/// Assembles the curvature tensor from finite differences of the Christoffel symbols and
/// compares it with the constant-curvature `-1` form.
pub fn riemann_check(chart: &PolarChart, xi: &[f64]) -> CurvatureCheck {
    let n = chart.dim();
    let gamma = chart.christoffel(xi);
    let g = chart.metric_at(xi).diag;
    let gam = |x: &[f64]| chart.christoffel(x).data;
    // dgamma[a] = d/dxi^a Gamma^m_ij
    let dgamma: Vec<Vec<f64>> = (0..n)
        .map(|a| richardson_partial(&gam, xi, a, CURVATURE_STEP))
        .collect();
    let gi = |m: usize, i: usize, j: usize| gamma.get(m, i, j);
    let dgi = |a: usize, m: usize, i: usize, j: usize| dgamma[a][(m * n + i) * n + j];

    // R^r_{s,mu,nu} = d_mu G^r_{nu s} - d_nu G^r_{mu s} + G^r_{mu l} G^l_{nu s} - G^r_{nu l} G^l_{mu s}
    let idx = |i: usize, j: usize, k: usize, l: usize| ((i * n + j) * n + k) * n + l;
    let mut riemann = vec![0.0; n * n * n * n];
    for r in 0..n {
        for s in 0..n {
            for mu in 0..n {
                for nu in 0..n {
                    let mut v = dgi(mu, r, nu, s) - dgi(nu, r, mu, s);
                    for l in 0..n {
                        v += gi(r, mu, l) * gi(l, nu, s) - gi(r, nu, l) * gi(l, mu, s);
                    }
                    riemann[idx(r, s, mu, nu)] = g[r] * v;
                }
            }
        }
    }

    let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    let mut residual: f64 = 0.0;
    let mut antisymmetry: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let model = -(g[i] * delta(i, k) * g[j] * delta(j, l)
                        - g[i] * delta(i, l) * g[j] * delta(j, k));
                    residual = residual.max((riemann[idx(i, j, k, l)] - model).abs());
                    antisymmetry = antisymmetry
                        .max((riemann[idx(i, j, k, l)] + riemann[idx(j, i, k, l)]).abs());
                }
            }
        }
    }
    let mut sectional = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            sectional.push(riemann[idx(i, j, i, j)] / (g[i] * g[j]));
        }
    }
    CurvatureCheck {
        residual,
        antisymmetry,
        sectional,
        riemann,
    }
}

/// Gauss / Weingarten formula residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussWeingartenCheck {
    /// `max |h_ij - sigma_ij|` with `h_ij = -<X_{,ij}, nu>_L`.
    pub second_fundamental_form: f64,
    /// `max |X_{,ij} - h_ij nu|` over ambient components.
    pub gauss: f64,
    /// `max |nu_{,i} - h_ij X^j|` over ambient components.
    pub weingarten: f64,
    /// `|<nu, nu>_L + 1|`.
    pub normal_unit: f64,
    /// `max |<nu, d_i X>_L|`.
    pub normality: f64,
}

impl GaussWeingartenCheck {
    pub fn max_residual(&self) -> f64 {
        self.second_fundamental_form
            .max(self.gauss)
            .max(self.weingarten)
            .max(self.normal_unit)
            .max(self.normality)
    }
}

/// Step used for the embedding differences in [`gauss_weingarten_check`].
pub const GAUSS_STEP: f64 = 3e-3;

/// Numerically verifies `X_{,ij} = h_ij nu`, `nu_{,i} = h_ij X^j` and `h_ij = sigma_ij`,
/// with `nu = X` the future-directed unit normal of the hyperboloid.
pub fn gauss_weingarten_check(chart: &PolarChart, xi: &[f64]) -> GaussWeingartenCheck {
    let n = chart.dim();
    let h = GAUSS_STEP;
    let x_at = |p: &[f64]| chart.embed(p).0;
    let shifted = |da: &[(usize, f64)]| {
        let mut p = xi.to_vec();
        for &(a, s) in da {
            p[a] += s;
        }
        x_at(&p)
    };
    let nu = x_at(xi);
    let dim = n + 1;

    // first and second derivatives of X, Richardson-extrapolated from steps h and h/2
    let first = |a: usize, h: f64| -> Vec<f64> {
        let p = shifted(&[(a, h)]);
        let m = shifted(&[(a, -h)]);
        (0..dim).map(|c| (p[c] - m[c]) / (2.0 * h)).collect()
    };
    let second = |a: usize, b: usize, h: f64| -> Vec<f64> {
        if a == b {
            let p = shifted(&[(a, h)]);
            let m = shifted(&[(a, -h)]);
            (0..dim).map(|c| (p[c] - 2.0 * nu[c] + m[c]) / (h * h)).collect()
        } else {
            let pp = shifted(&[(a, h), (b, h)]);
            let pm = shifted(&[(a, h), (b, -h)]);
            let mp = shifted(&[(a, -h), (b, h)]);
            let mm = shifted(&[(a, -h), (b, -h)]);
            (0..dim)
                .map(|c| (pp[c] - pm[c] - mp[c] + mm[c]) / (4.0 * h * h))
                .collect()
        }
    };
    let extrapolate = |coarse: Vec<f64>, fine: Vec<f64>| -> Vec<f64> {
        coarse.iter().zip(&fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect()
    };
    let dx: Vec<Vec<f64>> = (0..n)
        .map(|a| extrapolate(first(a, h), first(a, 0.5 * h)))
        .collect();
    let mut ddx = vec![vec![0.0; dim]; n * n];
    for a in 0..n {
        for b in 0..n {
            ddx[a * n + b] = extrapolate(second(a, b, h), second(a, b, 0.5 * h));
        }
    }

    let gamma = chart.christoffel(xi);
    let metric = chart.metric_at(xi);
    let mut sff: f64 = 0.0;
    let mut gauss: f64 = 0.0;
    let mut hij = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let cov: Vec<f64> = (0..dim)
                .map(|c| {
                    ddx[i * n + j][c] - (0..n).map(|m| gamma.get(m, i, j) * dx[m][c]).sum::<f64>()
                })
                .collect();
            let hv = -lorentz_inner(&cov, &nu);
            hij[i * n + j] = hv;
            let sij = if i == j { metric.diag[i] } else { 0.0 };
            sff = sff.max((hv - sij).abs());
            for c in 0..dim {
                gauss = gauss.max((cov[c] - hv * nu[c]).abs());
            }
        }
    }
    let mut weingarten: f64 = 0.0;
    for i in 0..n {
        // nu = X, so nu_{,i} = d_i X
        for c in 0..dim {
            let rhs: f64 = (0..n)
                .map(|j| hij[i * n + j] * metric.inv_diag[j] * dx[j][c])
                .sum();
            weingarten = weingarten.max((dx[i][c] - rhs).abs());
        }
    }
    let normality = dx
        .iter()
        .map(|d| lorentz_inner(&nu, d).abs())
        .fold(0.0, f64::max);
    GaussWeingartenCheck {
        second_fundamental_form: sff,
        gauss,
        weingarten,
        normal_unit: (lorentz_inner(&nu, &nu) + 1.0).abs(),
        normality,
    }
}

/// Hyperbolic distance between two chart points,
/// `arcosh(-<X_p, X_q>_L) = 2 asinh(|X_p - X_q|_L / 2)`; the second form keeps full
/// relative accuracy for nearby points.
pub fn geodesic_dist(chart: &PolarChart, p: &[f64], q: &[f64]) -> f64 {
    let xp = chart.embed(p).0;
    let xq = chart.embed(q).0;
    let d: Vec<f64> = xp.iter().zip(&xq).map(|(a, b)| a - b).collect();
    let chord2 = lorentz_inner(&d, &d).max(0.0);
    2.0 * (0.5 * chord2.sqrt()).asinh()
}

/// `(n - 1) coth(rho)`, the Laplacian of the distance function at distance `rho`.
pub fn laplace_of_distance(n: usize, rho: f64) -> Result<f64> {
    if !(rho >= 1e-8) {
        return Err(Error::DegenerateDistance(rho));
    }
    Ok((n - 1) as f64 / rho.tanh())
}

/// `Lap rho(q, .)` at `x`.
pub fn laplace_dist(chart: &PolarChart, x: &[f64], q: &[f64]) -> Result<f64> {
    laplace_of_distance(chart.dim(), geodesic_dist(chart, x, q))
}

/// Distance-range bounds for the Laplacian of `rho(q, .)` over a set of points.
#[derive(Debug, Clone, PartialEq)]
pub struct DistBounds {
    pub c_minus: f64,
    pub c_plus: f64,
    /// `(n-1) coth(c+)`.
    pub lower: f64,
    /// `(n-1) coth(c-)`.
    pub upper: f64,
    /// `(n-1) coth(c+) <= Lap rho <= (n-1) coth(c-)` held at every point.
    pub coth_bounds_hold: bool,
    /// `(n-1)/c+`.
    pub comparison_lower: f64,
    /// `(n-1)(sqrt(K) + 1/c-)` with `K = 1`.
    pub comparison_upper: f64,
    /// The comparison chain held at every point.
    pub comparison_holds: bool,
}

/// Sectional-curvature lower bound magnitude used by the comparison chain.
const COMPARISON_K: f64 = 1.0;

pub fn dist_bounds<'a, I>(chart: &PolarChart, points: I, q: &[f64]) -> Result<DistBounds>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let n = chart.dim();
    let rhos: Vec<f64> = points
        .into_iter()
        .map(|x| geodesic_dist(chart, x, q))
        .collect();
    if rhos.is_empty() {
        return Err(Error::InvalidInput("no points given".into()));
    }
    let c_minus = rhos.iter().cloned().fold(f64::INFINITY, f64::min);
    let c_plus = rhos.iter().cloned().fold(0.0, f64::max);
    if c_minus < 1e-8 {
        return Err(Error::QInsideDomain(c_minus));
    }
    let lower = laplace_of_distance(n, c_plus)?;
    let upper = laplace_of_distance(n, c_minus)?;
    let comparison_lower = (n - 1) as f64 / c_plus;
    let comparison_upper = (n - 1) as f64 * (COMPARISON_K.sqrt() + 1.0 / c_minus);
    let mut coth_bounds_hold = true;
    let mut comparison_holds = true;
    for &rho in &rhos {
        let lap = laplace_of_distance(n, rho)?;
        coth_bounds_hold &= lower <= lap && lap <= upper;
        comparison_holds &= comparison_lower <= lap && lap <= comparison_upper;
    }
    Ok(DistBounds {
        c_minus,
        c_plus,
        lower,
        upper,
        coth_bounds_hold,
        comparison_lower,
        comparison_upper,
        comparison_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embed_pole_and_radial_ray() {
        let c2 = PolarChart::new(2).unwrap();
        assert_eq!(c2.embed(&[0.3, 0.0]), LorentzPoint::pole(2));
        let r: f64 = 0.8;
        let x = c2.embed(&[0.0, r]).0;
        assert_eq!(x, vec![r.sinh(), 0.0, r.cosh()]);
        let c3 = PolarChart::new(3).unwrap();
        let x = c3.embed(&[0.2, -0.4, 1.1]);
        assert!(x.on_hyperboloid(1e-12));
    }

    #[test]
    fn lorentz_inner_examples() {
        assert_eq!(lorentz_inner(&[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0]), -1.0);
        assert_eq!(lorentz_inner(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]), 0.0);
        assert_eq!(lorentz_inner(&[0.0, 0.0, 1.0], &[0.0, 0.0, 2.0]), -2.0);
    }

    #[test]
    fn metric_values() {
        let c = PolarChart::new(2).unwrap();
        let m = c.metric_at(&[0.4, 1.0]);
        assert!((m.diag[0] - 1f64.sinh().powi(2)).abs() < 1e-15);
        assert!((m.diag[0] - 1.3810978455418161).abs() < 1e-12);
        assert_eq!(m.diag[1], 1.0);
        for i in 0..2 {
            assert!((m.diag[i] * m.inv_diag[i] - 1.0).abs() < 1e-15);
        }
        let c4 = PolarChart::new(4).unwrap();
        let xi = [0.3, -0.2, 0.5, 1.2];
        let m = c4.metric_at(&xi);
        let s2 = 1.2f64.sinh().powi(2);
        assert!((m.diag[2] - s2 * 0.3f64.cos().powi(2) * 0.2f64.cos().powi(2)).abs() < 1e-14);
    }

    #[test]
    fn christoffel_n2_closed_form() {
        let c = PolarChart::new(2).unwrap();
        let r: f64 = 1.3;
        let g = c.christoffel(&[0.2, r]);
        assert!((g.get(0, 0, 1) - 1.0 / r.tanh()).abs() < 1e-14);
        assert_eq!(g.get(0, 0, 1), g.get(0, 1, 0));
        assert!((g.get(1, 0, 0) + r.sinh() * r.cosh()).abs() < 1e-14);
        assert_eq!(g.get(1, 1, 1), 0.0);
        assert_eq!(g.get(0, 0, 0), 0.0);
        assert_eq!(g.get(1, 0, 1), 0.0);
    }

    #[test]
    fn curvature_minus_one() {
        let c = PolarChart::new(2).unwrap();
        let chk = riemann_check(&c, &[0.3, 1.2]);
        assert!(chk.residual <= 1e-6, "{}", chk.residual);
        assert!(chk.antisymmetry <= 1e-10, "{}", chk.antisymmetry);
        for k in chk.sectional {
            assert!((k + 1.0).abs() <= 1e-6);
        }
        let c3 = PolarChart::new(3).unwrap();
        let chk = riemann_check(&c3, &[0.4, -0.3, 0.9]);
        assert!(chk.residual <= 1e-6, "{}", chk.residual);
    }

    #[test]
    fn gauss_weingarten() {
        let c = PolarChart::new(2).unwrap();
        let chk = gauss_weingarten_check(&c, &[0.5, 1.0]);
        assert!(chk.second_fundamental_form <= 1e-6, "{chk:?}");
        assert!(chk.normal_unit <= 1e-10);
        assert!(chk.normality <= 1e-8);
        assert!(chk.max_residual() <= 1e-6);
    }

    #[test]
    fn distances() {
        let c = PolarChart::new(2).unwrap();
        let pole = [0.0, 0.0];
        let p = [0.7, 1.4];
        assert!((geodesic_dist(&c, &pole, &p) - 1.4).abs() < 1e-14);
        assert_eq!(geodesic_dist(&c, &p, &p), 0.0);
        let q = [-0.2, 0.6];
        assert_eq!(geodesic_dist(&c, &p, &q), geodesic_dist(&c, &q, &p));
    }

    #[test]
    fn laplacian_of_distance() {
        let c = PolarChart::new(2).unwrap();
        let v = laplace_dist(&c, &[0.1, 1.0], &[0.0, 0.0]).unwrap();
        assert!((v - 1.3130352854993312).abs() < 1e-14);
        assert!(matches!(
            laplace_dist(&c, &[0.1, 1.0], &[0.1, 1.0]),
            Err(Error::DegenerateDistance(_))
        ));
        let mut prev = f64::INFINITY;
        for i in 1..200 {
            let v = laplace_of_distance(3, 0.05 * i as f64).unwrap();
            assert!(v < prev && v > 2.0);
            prev = v;
        }
    }

    #[test]
    fn bounds_single_point_tight() {
        let c = PolarChart::new(2).unwrap();
        let x = [0.0, 0.9];
        let b = dist_bounds(&c, [&x[..]], &[0.0, 0.0]).unwrap();
        assert!((b.lower - b.upper).abs() < 1e-15);
        assert!(b.coth_bounds_hold && b.comparison_holds);
        let err = dist_bounds(&c, [&x[..]], &x).unwrap_err();
        assert!(matches!(err, Error::QInsideDomain(_)));
    }

    #[test]
    fn admissibility() {
        let c = PolarChart::new(3).unwrap();
        assert!(c.check_admissible(&[0.2, 3.0, 0.6], 0.5).is_ok());
        assert!(c.check_admissible(&[1.5, 0.0, 0.6], 0.5).is_err());
        assert!(c.check_admissible(&[0.2, 0.0, 0.4], 0.5).is_err());
        assert!(PolarChart::new(5).is_err());
    }
}
