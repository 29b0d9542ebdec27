//! Property suites for the symmetric functions, the quotient operator and the
//! hyperbolic geometry. Each suite returns one row per checked quantity.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baseline;
use crate::error::Result;
use crate::hessop::{ChartBox, Grid, GridGeometry};
use crate::hypgeom::{
    dist_bounds, gauss_weingarten_check, geodesic_dist, laplace_dist, riemann_check, PolarChart,
};
use crate::linalg::SymMat;
use crate::oracle::{
    discrete_laplace_beltrami, fd_christoffel, fd_derivative, metric_pullback, quotient_by_minors, random_gamma_k,
    random_symmetric, random_vector, random_with_spectrum, sigma_bruteforce, FdOrder,
};
use crate::pogorelov::grid_dist_bounds;
use crate::symfunc::{
    check_fl2, check_maclaurin, check_prop1, f_grad, f_hess_form, f_value, in_gamma_k,
    offdiag_second_coefficient, sigma, trace_lower_bound, QuotientSpec,
};

/// Environment variable holding the suite seed.
pub const SEED_VAR: &str = "HESSQUOT_SEED";

/// Seed from [`SEED_VAR`], `0` when unset or unparsable.
pub fn seed_from_env() -> u64 {
    std::env::var(SEED_VAR)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    Within(f64, f64),
    /// A boolean check, stored as `1` for true.
    IsTrue,
}

impl Bound {
    pub fn admits(&self, v: f64) -> bool {
        match *self {
            Bound::AtMost(t) => v <= t,
            Bound::AtLeast(t) => v >= t,
            Bound::Within(lo, hi) => lo <= v && v <= hi,
            Bound::IsTrue => v == 1.0,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Bound::AtMost(t) => write!(f, "<= {t:e}"),
            Bound::AtLeast(t) => write!(f, ">= {t:e}"),
            Bound::Within(lo, hi) => write!(f, "in [{lo}, {hi}]"),
            Bound::IsTrue => write!(f, "true"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub pass: bool,
}

impl CheckRow {
    pub fn new(name: impl Into<String>, value: f64, bound: Bound) -> Self {
        CheckRow {
            name: name.into(),
            value,
            bound,
            pass: bound.admits(value),
        }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        CheckRow::new(name, if ok { 1.0 } else { 0.0 }, Bound::IsTrue)
    }
}

impl fmt::Display for CheckRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{status} {:<44} {:>12.4e}  {}", self.name, self.value, self.bound)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub seed: u64,
    pub rows: Vec<CheckRow>,
    pub elapsed: Duration,
    /// Wall-clock budget for the whole suite.
    pub budget: Duration,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass) && self.elapsed <= self.budget
    }

    pub fn failures(&self) -> Vec<&CheckRow> {
        self.rows.iter().filter(|r| !r.pass).collect()
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "suite {} (seed {})", self.name, self.seed)?;
        for row in &self.rows {
            writeln!(f, "  {row}")?;
        }
        write!(
            f,
            "  runtime {:.2} s (budget {} s)",
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )
    }
}

/// Number of random samples per property.
pub const SAMPLES: usize = 10_000;
/// Number of sorted diagonal samples per spec for the ordering checks.
pub const DIAGONAL_SAMPLES: usize = 1_000;

fn finish(name: &'static str, seed: u64, rows: Vec<CheckRow>, start: Instant, budget: u64) -> SuiteReport {
    SuiteReport {
        name,
        seed,
        rows,
        elapsed: start.elapsed(),
        budget: Duration::from_secs(budget),
    }
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

fn abs_all(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x.abs()).collect()
}

/// Symmetric-function suite.
pub fn symmetric_suite(seed: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();

    let mut worst_sigma: f64 = 0.0;
    for _ in 0..SAMPLES {
        let n = rng.gen_range(1..=6);
        let scale = log_uniform(&mut rng, 0.1, 10.0);
        let lam: Vec<f64> = random_vector(&mut rng, n).iter().map(|x| x * scale).collect();
        let abs = abs_all(&lam);
        for k in 0..=n {
            let want = sigma_bruteforce(&lam, k);
            let got = sigma(&lam, k as i32);
            let s = sigma_bruteforce(&abs, k).max(f64::MIN_POSITIVE);
            worst_sigma = worst_sigma.max((got - want).abs() / s);
        }
    }
    rows.push(CheckRow::new("sigma vs subset enumeration (rel)", worst_sigma, Bound::AtMost(1e-12)));

    let mut worst_prop = 0.0f64;
    let mut nonpositive_partials = 0usize;
    for _ in 0..SAMPLES {
        let n = rng.gen_range(2..=6);
        let k = rng.gen_range(1..=n);
        let lam = random_gamma_k(&mut rng, n, k);
        let r = check_prop1(&lam, k);
        worst_prop = worst_prop.max(r.max_residual());
        if !(r.min_partial > 0.0) {
            nonpositive_partials += 1;
        }
    }
    rows.push(CheckRow::new("cone identities max residual", worst_prop, Bound::AtMost(1e-10)));
    rows.push(CheckRow::new(
        "cone samples with sigma_{k-1}(.|i) <= 0",
        nonpositive_partials as f64,
        Bound::AtMost(0.0),
    ));

    let mut violations = 0usize;
    let mut worst_slack = f64::INFINITY;
    for _ in 0..SAMPLES {
        let n = rng.gen_range(2..=6);
        let k = rng.gen_range(1..=n);
        let l = rng.gen_range(0..k);
        let s = rng.gen_range(0..=l);
        let r = rng.gen_range(s + 1..=k);
        let spec = QuotientSpec::new(n, k, l, 1.0)?;
        let lam = random_gamma_k(&mut rng, n, k);
        let m = check_maclaurin(&lam, &spec, r, s)?;
        if !m.holds(1e-12) {
            violations += 1;
        }
        worst_slack = worst_slack
            .min(m.product_slack / m.product_scale.max(f64::MIN_POSITIVE))
            .min(m.quotient_slack / m.quotient_scale.max(f64::MIN_POSITIVE));
    }
    rows.push(CheckRow::new("Newton-Maclaurin violations", violations as f64, Bound::AtMost(0.0)));
    rows.push(CheckRow::new("Newton-Maclaurin worst relative slack", worst_slack, Bound::AtLeast(-1e-12)));

    Ok(finish("symmetric", seed, rows, start, 10))
}

/// Specs sampled by the operator suite.
const OPERATOR_SPECS: [(usize, usize, usize); 8] = [
    (2, 2, 0),
    (2, 2, 1),
    (3, 2, 0),
    (3, 3, 1),
    (3, 3, 2),
    (4, 4, 2),
    (4, 3, 1),
    (5, 3, 0),
];

/// Cone sample normalized to `max |lambda_i| = 1` with `lambda - margin (1, ..., 1)`
/// still in the cone.
fn inside_cone<R: Rng>(rng: &mut R, n: usize, k: usize, margin: f64) -> Vec<f64> {
    loop {
        let lam = random_gamma_k(rng, n, k);
        let top = lam.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let lam: Vec<f64> = lam.iter().map(|x| x / top).collect();
        let shifted: Vec<f64> = lam.iter().map(|x| x - margin).collect();
        if in_gamma_k(&shifted, k) {
            return lam;
        }
    }
}

/// Cone margin of the finite-difference samples.
pub const FD_MARGIN: f64 = 0.05;
/// Minimum relative gap between consecutive diagonal entries in the ordering samples.
pub const DIAGONAL_GAP: f64 = 1e-2;

fn sorted_diagonal<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<f64> {
    loop {
        let mut lam = random_gamma_k(rng, n, k);
        lam.sort_by(|a, b| b.total_cmp(a));
        let top = lam.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if lam.windows(2).all(|w| w[0] - w[1] >= DIAGONAL_GAP * top) {
            return lam;
        }
    }
}

/// Quotient-operator suite.
pub fn operator_suite(seed: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let specs: Vec<QuotientSpec> = OPERATOR_SPECS
        .iter()
        .map(|&(n, k, l)| QuotientSpec::new(n, k, l, 1.0))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();

    let mut grad_err = 0.0f64;
    let mut hess_err = 0.0f64;
    for i in 0..DIAGONAL_SAMPLES {
        let spec = &specs[i % specs.len()];
        let lam = inside_cone(&mut rng, spec.n, spec.k, FD_MARGIN);
        let u = random_with_spectrum(&mut rng, &lam);
        let v = random_symmetric(&mut rng, spec.n);
        let v = v.scaled(1.0 / v.frobenius());
        let f = |m: &SymMat| quotient_by_minors(m, spec);
        let g = f_grad(&u, spec)?;
        let fd1 = fd_derivative(f, &u, &v, FdOrder::First)?;
        let scale = g.frobenius().max(f64::MIN_POSITIVE);
        grad_err = grad_err.max((fd1 - g.contract(&v)).abs() / scale);
        let fd2 = fd_derivative(f, &u, &v, FdOrder::Second)?;
        hess_err = hess_err.max((fd2 - f_hess_form(&u, &v, spec)?).abs());
    }
    rows.push(CheckRow::new("F_grad vs first differences (rel)", grad_err, Bound::AtMost(1e-7)));
    rows.push(CheckRow::new("F_hess_form vs second differences", hess_err, Bound::AtMost(1e-6)));

    let mut worst_hess = f64::NEG_INFINITY;
    let mut worst_mid = f64::INFINITY;
    let mut worst_trace = f64::INFINITY;
    for i in 0..SAMPLES {
        let spec = &specs[i % specs.len()];
        let (la, lb) = (random_gamma_k(&mut rng, spec.n, spec.k), random_gamma_k(&mut rng, spec.n, spec.k));
        let a = random_with_spectrum(&mut rng, &la);
        let b = random_with_spectrum(&mut rng, &lb);
        let v = random_symmetric(&mut rng, spec.n);
        worst_hess = worst_hess.max(f_hess_form(&a, &v, spec)?);
        let (fa, fb) = (f_value(&a, spec)?, f_value(&b, spec)?);
        let mid = f_value(&a.axpy(1.0, &b).scaled(0.5), spec)?;
        worst_mid = worst_mid.min((mid - 0.5 * (fa + fb)) / (fa.abs() + fb.abs()));
        worst_trace = worst_trace.min(trace_lower_bound(&a, spec)?);
    }
    rows.push(CheckRow::new("concavity max F_hess_form", worst_hess, Bound::AtMost(1e-10)));
    rows.push(CheckRow::new("midpoint concavity worst relative gap", worst_mid, Bound::AtLeast(-1e-12)));
    rows.push(CheckRow::new("trace lower bound min slack", worst_trace, Bound::AtLeast(-1e-10)));
    let at_identity = trace_lower_bound(&SymMat::identity(3), &QuotientSpec::new(3, 2, 0, 1.0)?)?;
    rows.push(CheckRow::new(
        "trace bound |slack| at U=I for (3,2,0)",
        at_identity.abs(),
        Bound::AtMost(4.0 * f64::EPSILON),
    ));

    for &(n, k, l) in &[(3, 2, 0), (3, 3, 1), (4, 4, 2)] {
        let spec = QuotientSpec::new(n, k, l, 1.0)?;
        let mut fl1 = 0.0f64;
        let mut unordered = 0usize;
        for _ in 0..DIAGONAL_SAMPLES {
            let d = sorted_diagonal(&mut rng, n, k);
            let u = SymMat::from_diag(&d);
            let g = f_grad(&u, &spec)?;
            for i in 1..n {
                let got = offdiag_second_coefficient(&u, &spec, 0, i)?;
                let want = (g.get(i, i) - g.get(0, 0)) / (d[0] - d[i]);
                fl1 = fl1.max((got - want).abs() / want.abs().max(f64::MIN_POSITIVE));
            }
            if !check_fl2(&u, &spec)? {
                unordered += 1;
            }
        }
        rows.push(CheckRow::new(format!("off-diagonal identity ({n},{k},{l}) (rel)"), fl1, Bound::AtMost(1e-8)));
        rows.push(CheckRow::new(
            format!("gradient ordering failures ({n},{k},{l})"),
            unordered as f64,
            Bound::AtMost(0.0),
        ));
    }

    Ok(finish("operator", seed, rows, start, 30))
}

/// Random admissible chart point with radial coordinate in `[0.2, 2.5)`.
fn random_chart_point<R: Rng>(rng: &mut R, chart: &PolarChart) -> Vec<f64> {
    let n = chart.dim();
    let lat = 0.9 * PolarChart::max_latitude();
    loop {
        let mut xi: Vec<f64> = (0..n).map(|_| rng.gen_range(-lat..lat)).collect();
        xi[n - 1] = rng.gen_range(0.2..2.5);
        if n >= 2 {
            // the last angular axis enters only through sin/cos of the full circle
            xi[n - 2] = rng.gen_range(-3.0..3.0);
        }
        if chart.check_admissible(&xi, 0.1).is_ok() {
            return xi;
        }
    }
}

/// Random points per dimension `n = 2, 3, 4`.
const GEOMETRY_POINTS: usize = 334;
const COMPARISON_POINTS: usize = 1_000;

fn metric_derivative(chart: &PolarChart, xi: &[f64], a: usize) -> Vec<f64> {
    let at = |h: f64| -> Vec<f64> {
        let mut p = xi.to_vec();
        let mut q = xi.to_vec();
        p[a] += h;
        q[a] -= h;
        let (gp, gq) = (chart.metric_at(&p).diag, chart.metric_at(&q).diag);
        gp.iter().zip(&gq).map(|(x, y)| (x - y) / (2.0 * h)).collect()
    };
    let (c, f) = (at(1e-3), at(5e-4));
    c.iter().zip(&f).map(|(c, f)| (4.0 * f - c) / 3.0).collect()
}

/// Max over the box interior of `|Lap_h rho - laplace_dist|`.
fn laplace_deviation(grid: &Grid) -> Result<f64> {
    let chart = grid.chart();
    let pole = vec![0.0; grid.dim()];
    let rho: Vec<f64> = (0..grid.len())
        .map(|p| geodesic_dist(chart, &grid.coords(p), &pole))
        .collect();
    let mut worst = 0.0f64;
    for p in grid.interior_nodes() {
        let exact = laplace_dist(chart, &grid.coords(p), &pole)?;
        worst = worst.max((discrete_laplace_beltrami(grid, &rho, p) - exact).abs());
    }
    Ok(worst)
}

/// Hyperbolic geometry suite.
pub fn geometry_suite(seed: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();

    let mut pullback = 0.0f64;
    let mut compat = 0.0f64;
    let mut gamma_fd = 0.0f64;
    let mut curvature = 0.0f64;
    let mut gw = 0.0f64;
    for n in 2..=4 {
        let chart = PolarChart::new(n)?;
        for _ in 0..GEOMETRY_POINTS {
            let xi = random_chart_point(&mut rng, &chart);
            let g = chart.metric_at(&xi).diag;
            let pb = metric_pullback(&chart, &xi);
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { g[i] } else { 0.0 };
                    pullback = pullback.max((pb[i * n + j] - want).abs() / g[i].max(g[j]).max(1.0));
                }
            }
            let gamma = chart.christoffel(&xi);
            for a in 0..n {
                let dg = metric_derivative(&chart, &xi, a);
                for i in 0..n {
                    for j in 0..n {
                        let d = if i == j { dg[i] } else { 0.0 };
                        let cov = d - gamma.get(j, a, i) * g[j] - gamma.get(i, a, j) * g[i];
                        compat = compat.max(cov.abs() / g[i].max(g[j]).max(1.0));
                    }
                }
            }
            let fd = fd_christoffel(&chart, &xi);
            for (x, y) in fd.iter().zip(gamma.as_slice()) {
                gamma_fd = gamma_fd.max((x - y).abs() / y.abs().max(1.0));
            }
            curvature = curvature.max(riemann_check(&chart, &xi).residual);
            gw = gw.max(gauss_weingarten_check(&chart, &xi).max_residual());
        }
    }
    rows.push(CheckRow::new("metric pullback residual", pullback, Bound::AtMost(1e-8)));
    rows.push(CheckRow::new("covariant derivative of the metric", compat, Bound::AtMost(1e-8)));
    rows.push(CheckRow::new("Christoffel vs embedding differences", gamma_fd, Bound::AtMost(1e-6)));
    rows.push(CheckRow::new("curvature tensor vs -1 model", curvature, Bound::AtMost(1e-6)));
    rows.push(CheckRow::new("Gauss-Weingarten residual", gw, Bound::AtMost(1e-6)));

    for n in [2usize, 3] {
        let chart = PolarChart::new(n)?;
        let coarse = if n == 2 { baseline::COARSE_NODES } else { 9 };
        let mut grid = Grid::uniform(chart, ChartBox::annular(n, baseline::ANGULAR, baseline::RADIAL), coarse)?;
        let mut errs = Vec::new();
        for _ in 0..3 {
            errs.push(laplace_deviation(&grid)?);
            grid = grid.refined();
        }
        rows.push(CheckRow::new(format!("Laplace of distance deviation n={n} finest"), errs[2], Bound::AtMost(1e-2)));
        for w in 0..2 {
            let order = (errs[w] / errs[w + 1]).log2();
            rows.push(CheckRow::new(
                format!("Laplace of distance order n={n} step {}", w + 1),
                order,
                Bound::Within(1.6, 2.4),
            ));
        }
    }

    let mut coth_ok = true;
    for level in 0..baseline::LEVELS {
        let geom = GridGeometry::new(&baseline::grid(level)?);
        coth_ok &= grid_dist_bounds(&geom)?.coth_bounds_hold;
    }
    rows.push(CheckRow::flag("coth bounds at every baseline node", coth_ok));

    let mut chain_ok = true;
    for n in 2..=4 {
        let chart = PolarChart::new(n)?;
        let points: Vec<Vec<f64>> = (0..COMPARISON_POINTS)
            .map(|_| random_chart_point(&mut rng, &chart))
            .collect();
        let pole = vec![0.0; n];
        chain_ok &= dist_bounds(&chart, points.iter().map(Vec::as_slice), &pole)?.comparison_holds;
    }
    rows.push(CheckRow::flag("comparison chain at random points", chain_ok));

    Ok(finish("geometry", seed, rows, start, 30))
}

/// Runs the three suites in order.
pub fn all_suites(seed: u64) -> Result<Vec<SuiteReport>> {
    Ok(vec![symmetric_suite(seed)?, operator_suite(seed)?, geometry_suite(seed)?])
}
