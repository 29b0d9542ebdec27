//! Interior second-derivative estimates `(-u)^beta |Hess u|` under refinement,
//! and the maximum-principle probe of the test function
//! `P = beta log(-u) + log u_11 + (a/2)|grad u|^2 + A rho`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hessop::{covariant_gradient, covariant_hessian, u_tensor, GridGeometry, HessOp, ScalarField};
use crate::hypgeom::{dist_bounds, DistBounds};
use crate::linalg::SymMat;
use crate::solver::{continuation_solve, SolveConfig, SolveReport};
use crate::symfunc::{in_gamma_k, OperatorAt};

/// Norm used for `|Hess u|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HessNorm {
    /// Largest absolute eigenvalue.
    Spectral,
    /// Largest eigenvalue `u_11`.
    LargestEigenvalue,
    Frobenius,
}

impl HessNorm {
    pub const ALL: [HessNorm; 3] = [
        HessNorm::Spectral,
        HessNorm::LargestEigenvalue,
        HessNorm::Frobenius,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            HessNorm::Spectral => "spectral",
            HessNorm::LargestEigenvalue => "lambda_max",
            HessNorm::Frobenius => "frobenius",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        HessNorm::ALL.into_iter().find(|n| n.name() == s)
    }

    pub fn apply(&self, h: &SymMat) -> f64 {
        match self {
            HessNorm::Frobenius => h.frobenius(),
            _ => {
                let eig = h.eigen().eigenvalues;
                let (lo, hi) = (eig[0], eig[eig.len() - 1]);
                match self {
                    HessNorm::Spectral => lo.abs().max(hi.abs()),
                    _ => hi,
                }
            }
        }
    }
}

/// Test-function constants; the base point is the chart pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeConfig {
    pub beta: f64,
    pub a: f64,
    pub big_a: f64,
    pub norm: HessNorm,
}

impl ProbeConfig {
    pub fn new(beta: f64, a: f64, big_a: f64) -> Result<Self> {
        let probe = ProbeConfig {
            beta,
            a,
            big_a,
            norm: HessNorm::Spectral,
        };
        probe.validate()?;
        Ok(probe)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("beta", self.beta), ("a", self.a), ("A", self.big_a)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!("probe constant {name} = {v} must be positive")));
            }
        }
        Ok(())
    }
}

/// Nodes at least two stencils from the boundary.
fn deep_nodes(geom: &GridGeometry) -> Vec<usize> {
    (0..geom.grid.len())
        .filter(|&p| geom.grid.boundary_distance(p) >= 2)
        .collect()
}

/// Largest value and the lowest node index attaining it.
fn argmax(values: &[(usize, f64)]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for &(p, v) in values {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((p, v));
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MEstimate {
    pub value: f64,
    pub node: Option<usize>,
}

/// `max (-u)^beta |Hess u|` over nodes at least two stencils from the boundary.
pub fn estimate_m(geom: &GridGeometry, u: &ScalarField, beta: f64, norm: HessNorm) -> MEstimate {
    let values: Vec<(usize, f64)> = deep_nodes(geom)
        .par_iter()
        .map(|&p| {
            let h = covariant_hessian(geom, &u.values, p).expect("deep nodes are interior");
            (p, (-u[p]).max(0.0).powf(beta) * norm.apply(&h))
        })
        .collect();
    match argmax(&values) {
        Some((p, v)) => MEstimate {
            value: v,
            node: Some(p),
        },
        None => MEstimate {
            value: 0.0,
            node: None,
        },
    }
}

/// `|M_h4 - M_h2| <= 0.2 |M_h2 - M_h| + 0.05 M_h4`.
pub fn cauchy_stabilized(m_h: f64, m_h2: f64, m_h4: f64) -> bool {
    (m_h4 - m_h2).abs() <= 0.2 * (m_h2 - m_h).abs() + 0.05 * m_h4
}

/// Distance bounds from the pole over every node of the grid.
pub fn grid_dist_bounds(geom: &GridGeometry) -> Result<DistBounds> {
    let grid = &geom.grid;
    let pole = vec![0.0; grid.dim()];
    dist_bounds(grid.chart(), (0..grid.len()).map(|p| geom.coords(p)), &pole)
}

/// One converged solution of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSolution {
    pub amplitude: f64,
    pub level: usize,
    pub nodes: Vec<usize>,
    pub h: f64,
    pub sup_u: f64,
    pub sup_grad: f64,
    pub c_minus: f64,
    pub c_plus: f64,
    pub newton_iterations: usize,
    pub certificate: f64,
}

/// `M_h(beta)` at one refinement level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelEstimate {
    pub level: usize,
    pub h: f64,
    /// Configured norm.
    pub m: f64,
    pub node: Option<usize>,
    pub m_spectral: f64,
    pub m_lambda_max: f64,
    pub m_frobenius: f64,
    pub sup_u: f64,
    pub sup_grad: f64,
}

/// One `(beta, amplitude)` cell across refinement levels.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRecord {
    pub beta: f64,
    pub amplitude: f64,
    /// `None` where the solve failed.
    pub levels: Vec<Option<LevelEstimate>>,
    /// `None` unless the last three levels are all present.
    pub stabilized: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveFailure {
    pub amplitude: f64,
    pub level: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub norm: HessNorm,
    pub betas: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub solutions: Vec<LevelSolution>,
    pub cells: Vec<CellRecord>,
    pub failures: Vec<SolveFailure>,
}

impl EstimateReport {
    pub fn cell(&self, beta: f64, amplitude: f64) -> Option<&CellRecord> {
        self.cells
            .iter()
            .find(|c| c.beta == beta && c.amplitude == amplitude)
    }

    /// Smallest swept `beta` whose cell stabilizes at every amplitude.
    pub fn smallest_stabilizing_beta(&self) -> Option<f64> {
        self.betas.iter().copied().find(|&b| {
            self.amplitudes
                .iter()
                .all(|&a| self.cell(b, a).and_then(|c| c.stabilized) == Some(true))
        })
    }

    /// `sup |u|` at the finest level for each amplitude, in sweep order.
    pub fn sup_u_column(&self) -> Vec<Option<f64>> {
        let finest = self.solutions.iter().map(|s| s.level).max().unwrap_or(0);
        self.amplitudes
            .iter()
            .map(|&a| {
                self.solutions
                    .iter()
                    .find(|s| s.amplitude == a && s.level == finest)
                    .map(|s| s.sup_u)
            })
            .collect()
    }
}

fn config_at_level(base: &SolveConfig, level: usize, amplitude: f64) -> SolveConfig {
    let mut grid = base.grid.clone();
    for _ in 0..level {
        grid = grid.refined();
    }
    SolveConfig {
        grid,
        rhs: base.rhs.with_amplitude(amplitude),
        ..base.clone()
    }
}

fn level_solution(
    geom: &GridGeometry,
    report: &SolveReport,
    amplitude: f64,
    level: usize,
) -> Result<LevelSolution> {
    let bounds = grid_dist_bounds(geom)?;
    Ok(LevelSolution {
        amplitude,
        level,
        nodes: geom.grid.dims().to_vec(),
        h: geom.grid.h_max(),
        sup_u: report.sup_u,
        sup_grad: report.sup_grad,
        c_minus: bounds.c_minus,
        c_plus: bounds.c_plus,
        newton_iterations: report.newton_iterations(),
        certificate: report.certificate,
    })
}

/// Solves the base problem at `levels` successive halvings of `h` for every
/// amplitude and tabulates `M_h(beta)` for every `beta`. Solves run
/// concurrently; failed solves leave holes.
pub fn refine_sweep(
    base: &SolveConfig,
    levels: usize,
    betas: &[f64],
    amplitudes: &[f64],
    norm: HessNorm,
) -> Result<EstimateReport> {
    base.validate()?;
    if levels == 0 || betas.is_empty() || amplitudes.is_empty() {
        return Err(Error::InvalidInput(
            "sweep needs at least one level, beta and amplitude".into(),
        ));
    }
    if let Some(b) = betas.iter().find(|b| !(**b >= 0.0)) {
        return Err(Error::InvalidInput(format!("beta {b} must be nonnegative")));
    }
    let jobs: Vec<(f64, usize)> = amplitudes
        .iter()
        .flat_map(|&a| (0..levels).map(move |l| (a, l)))
        .collect();
    let solved: Vec<Result<(GridGeometry, SolveReport)>> = jobs
        .par_iter()
        .map(|&(amp, level)| {
            let cfg = config_at_level(base, level, amp);
            let report = continuation_solve(&cfg)?;
            Ok((GridGeometry::new(&cfg.grid), report))
        })
        .collect();

    let mut solutions = Vec::new();
    let mut failures = Vec::new();
    let mut fields = Vec::new();
    for (&(amp, level), res) in jobs.iter().zip(solved) {
        match res {
            Ok((geom, report)) => {
                solutions.push(level_solution(&geom, &report, amp, level)?);
                fields.push(Some((geom, report)));
            }
            Err(e) => {
                failures.push(SolveFailure {
                    amplitude: amp,
                    level,
                    message: e.to_string(),
                });
                fields.push(None);
            }
        }
    }

    let mut cells = Vec::new();
    for &beta in betas {
        for (ai, &amp) in amplitudes.iter().enumerate() {
            let levels_est: Vec<Option<LevelEstimate>> = (0..levels)
                .map(|level| {
                    fields[ai * levels + level].as_ref().map(|(geom, report)| {
                        let est = |n: HessNorm| estimate_m(geom, &report.u, beta, n);
                        let chosen = est(norm);
                        LevelEstimate {
                            level,
                            h: geom.grid.h_max(),
                            m: chosen.value,
                            node: chosen.node,
                            m_spectral: est(HessNorm::Spectral).value,
                            m_lambda_max: est(HessNorm::LargestEigenvalue).value,
                            m_frobenius: est(HessNorm::Frobenius).value,
                            sup_u: report.sup_u,
                            sup_grad: report.sup_grad,
                        }
                    })
                })
                .collect();
            let stabilized = if levels >= 3 {
                match &levels_est[levels - 3..] {
                    [Some(a), Some(b), Some(c)] => Some(cauchy_stabilized(a.m, b.m, c.m)),
                    _ => None,
                }
            } else {
                None
            };
            cells.push(CellRecord {
                beta,
                amplitude: amp,
                levels: levels_est,
                stabilized,
            });
        }
    }
    Ok(EstimateReport {
        norm,
        betas: betas.to_vec(),
        amplitudes: amplitudes.to_vec(),
        solutions,
        cells,
        failures,
    })
}

/// The probe evaluated at the discrete maximizer `x0` of `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeDiagnostics {
    pub node: usize,
    pub coords: Vec<f64>,
    pub h: f64,
    pub p_value: f64,
    /// Frame Hessian eigenvalues, descending.
    pub hess_eigs: Vec<f64>,
    /// Unit eigenvectors in the orthonormal frame, aligned with `hess_eigs`.
    pub frame: Vec<Vec<f64>>,
    /// `beta u_i / u + u_11i / u_11 + a u_ii u_i + A rho_i`.
    pub dif1: Vec<f64>,
    pub dif1_norm: f64,
    /// `sum_i T^ii P_;ii`.
    pub tp_sum: f64,
    /// `max(tp_sum, 0)`.
    pub eps_h: f64,
    pub f_diag: Vec<f64>,
    pub t_diag: Vec<f64>,
    /// `F^11 >= F^22 >= ... > 0`.
    pub f_ordered: bool,
    /// `0 < T^11 <= T^22 <= ...`.
    pub t_ordered: bool,
    pub c_plus: f64,
    /// `A T^11 (n - 1) coth(c+)`.
    pub final_term: f64,
}

/// Eigenvalues descending with their frame eigenvectors.
fn sorted_desc(h: &SymMat) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = h.eigen();
    let n = h.dim();
    let eigs = (0..n).rev().map(|j| d.eigenvalues[j]).collect();
    let vecs = (0..n).rev().map(|j| d.vector(j)).collect();
    (eigs, vecs)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Locates the interior maximizer of `P` and evaluates the first- and
/// second-order conditions there.
pub fn probe_p(op: &HessOp, u: &ScalarField, probe: &ProbeConfig) -> Result<ProbeDiagnostics> {
    probe.validate()?;
    let geom = &op.geom;
    let grid = &geom.grid;
    let n = grid.dim();
    let spec = op.spec;
    let interior = op.interior();

    // log of the largest Hessian eigenvalue and P; NaN where undefined
    let pointwise: Vec<(f64, f64)> = interior
        .par_iter()
        .map(|&p| {
            let h = covariant_hessian(geom, &u.values, p).expect("interior node");
            let lmax = h.eigen().eigenvalues[n - 1];
            if !(lmax > 0.0) || !(u[p] < 0.0) {
                return (lmax, f64::NAN);
            }
            let grad = covariant_gradient(geom, &u.values, p);
            let p_val = probe.beta * (-u[p]).ln()
                + lmax.ln()
                + 0.5 * probe.a * dot(&grad, &grad)
                + probe.big_a * geom.rho(p);
            (lmax, p_val)
        })
        .collect();
    let mut log_lmax = vec![f64::NAN; grid.len()];
    let mut p_field = vec![f64::NAN; grid.len()];
    for (&p, &(lmax, pv)) in interior.iter().zip(&pointwise) {
        log_lmax[p] = lmax.ln();
        p_field[p] = pv;
    }
    let candidates: Vec<(usize, f64)> = interior
        .iter()
        .map(|&p| (p, p_field[p]))
        .filter(|(_, v)| !v.is_nan())
        .collect();
    let Some((x0, p_value)) = argmax(&candidates) else {
        let best = pointwise.iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max);
        return Err(Error::LogDomain(best));
    };
    if grid.boundary_distance(x0) < 2 {
        return Err(Error::MaxOnBoundary { node: x0 });
    }

    let h = covariant_hessian(geom, &u.values, x0)?;
    let (hess_eigs, frame) = sorted_desc(&h);
    if !(hess_eigs[0] > 0.0) {
        return Err(Error::LogDomain(hess_eigs[0]));
    }

    // first-order condition in the eigenframe
    let grad = covariant_gradient(geom, &u.values, x0);
    let metric = geom.metric(x0);
    let grad_log: Vec<f64> = (0..n)
        .map(|a| {
            let s = grid.stride(a);
            (log_lmax[x0 + s] - log_lmax[x0 - s]) / (2.0 * grid.spacing()[a] * metric[a].sqrt())
        })
        .collect();
    let mut grad_rho = vec![0.0; n];
    grad_rho[n - 1] = 1.0 / metric[n - 1].sqrt();
    let dif1: Vec<f64> = (0..n)
        .map(|i| {
            let e = &frame[i];
            let ui = dot(&grad, e);
            probe.beta * ui / u[x0]
                + dot(&grad_log, e)
                + probe.a * hess_eigs[i] * ui
                + probe.big_a * dot(&grad_rho, e)
        })
        .collect();
    let dif1_norm = dif1.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    // second-order condition
    let stencil_ok = (0..grid.len())
        .filter(|&q| {
            let (a, b) = (grid.multi_index(q), grid.multi_index(x0));
            a.iter().zip(&b).all(|(x, y)| x.abs_diff(*y) <= 1)
        })
        .all(|q| !p_field[q].is_nan());
    if !stencil_ok {
        return Err(Error::LogDomain(f64::NAN));
    }
    let hp = covariant_hessian(geom, &p_field, x0)?;
    let umat = u_tensor(&h, spec.tau);
    let outside = || Error::Inadmissible(format!("U is outside Gamma_{} at the maximizer", spec.k));
    let oper = OperatorAt::new(&umat, &spec).map_err(|_| outside())?;
    if !in_gamma_k(oper.eigenvalues(), spec.k) {
        return Err(outside());
    }
    let fg = oper.grad();
    let tc = oper.decomp.compose(&oper.frame_t());
    let f_diag: Vec<f64> = frame.iter().map(|e| fg.quad(e)).collect();
    let t_diag: Vec<f64> = frame.iter().map(|e| tc.quad(e)).collect();
    let tp_sum: f64 = frame.iter().zip(&t_diag).map(|(e, t)| t * hp.quad(e)).sum();

    let tol = 1e-12 * f_diag.iter().chain(&t_diag).fold(0.0f64, |m, v| m.max(v.abs()));
    let f_ordered = f_diag.windows(2).all(|w| w[0] >= w[1] - tol) && f_diag[n - 1] > 0.0;
    let t_ordered = t_diag.windows(2).all(|w| w[0] <= w[1] + tol) && t_diag[0] > 0.0;

    let bounds = grid_dist_bounds(geom)?;
    let final_term = probe.big_a * t_diag[0] * bounds.lower;

    Ok(ProbeDiagnostics {
        node: x0,
        coords: geom.coords(x0).to_vec(),
        h: grid.h_max(),
        p_value,
        hess_eigs,
        frame,
        dif1,
        dif1_norm,
        tp_sum,
        eps_h: tp_sum.max(0.0),
        f_diag,
        t_diag,
        f_ordered,
        t_ordered,
        c_plus: bounds.c_plus,
        final_term,
    })
}

/// Result of the probe at one refinement level.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbeOutcome {
    Interior(Box<ProbeDiagnostics>),
    OnBoundary { node: usize },
    Failed(String),
}

impl ProbeOutcome {
    pub fn diagnostics(&self) -> Option<&ProbeDiagnostics> {
        match self {
            ProbeOutcome::Interior(d) => Some(d),
            _ => None,
        }
    }
}

/// One probe cell `(beta, a, A)` evaluated on every level.
#[derive(Debug, Clone, PartialEq)]
pub struct CellProbe {
    pub probe: ProbeConfig,
    pub levels: Vec<ProbeOutcome>,
}

/// Pass/fail summary of a cell with an interior maximum on every level.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeVerdict {
    pub h: Vec<f64>,
    pub dif1: Vec<f64>,
    /// `log2(r_h / r_finest) / (levels - 1)`, the mean order over the span.
    pub dif1_order: f64,
    pub tp: Vec<f64>,
    pub eps: Vec<f64>,
    pub eps_nonincreasing: bool,
    /// `1e-2 |A T^11 (n-1) coth(c+)|` on the finest level.
    pub tolerance: f64,
    pub finest_within_tolerance: bool,
    pub orderings: bool,
}

/// Minimum accepted `dif1_order`.
pub const DIF1_MIN_ORDER: f64 = 0.7;

impl ProbeVerdict {
    pub fn passed(&self) -> bool {
        self.dif1_order >= DIF1_MIN_ORDER
            && self.eps_nonincreasing
            && self.finest_within_tolerance
            && self.orderings
    }
}

impl CellProbe {
    pub fn all_interior(&self) -> bool {
        self.levels.iter().all(|o| o.diagnostics().is_some())
    }

    /// `None` unless every level has an interior maximum and there are at least two levels.
    pub fn verdict(&self) -> Option<ProbeVerdict> {
        let diags: Vec<&ProbeDiagnostics> =
            self.levels.iter().map(ProbeOutcome::diagnostics).collect::<Option<_>>()?;
        if diags.len() < 2 {
            return None;
        }
        let h: Vec<f64> = diags.iter().map(|d| d.h).collect();
        let dif1: Vec<f64> = diags.iter().map(|d| d.dif1_norm).collect();
        let last = diags.len() - 1;
        let dif1_order = (dif1[0] / dif1[last]).log2() / last as f64;
        let tp: Vec<f64> = diags.iter().map(|d| d.tp_sum).collect();
        let eps: Vec<f64> = diags.iter().map(|d| d.eps_h).collect();
        let eps_nonincreasing = eps.windows(2).all(|w| w[1] <= w[0]);
        let tolerance = 1e-2 * diags[last].final_term.abs();
        Some(ProbeVerdict {
            dif1_order,
            eps_nonincreasing,
            finest_within_tolerance: tp[last] <= tolerance,
            tolerance,
            orderings: diags.iter().all(|d| d.f_ordered && d.t_ordered),
            h,
            dif1,
            tp,
            eps,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeStudy {
    pub amplitude: f64,
    pub solutions: Vec<LevelSolution>,
    pub cells: Vec<CellProbe>,
}

impl ProbeStudy {
    /// First cell with an interior maximum on every level.
    pub fn selected(&self) -> Option<&CellProbe> {
        self.cells.iter().find(|c| c.all_interior())
    }
}

/// Solves the base problem on `levels` refinements and runs the probe for every
/// cell on each solution.
pub fn probe_study(base: &SolveConfig, levels: usize, cells: &[ProbeConfig]) -> Result<ProbeStudy> {
    base.validate()?;
    if levels == 0 || cells.is_empty() {
        return Err(Error::InvalidInput("probe needs at least one level and one cell".into()));
    }
    for c in cells {
        c.validate()?;
    }
    let amplitude = base.rhs.amplitude;
    let solved: Vec<(HessOp, SolveReport)> = (0..levels)
        .into_par_iter()
        .map(|level| {
            let cfg = config_at_level(base, level, amplitude);
            let report = continuation_solve(&cfg)?;
            Ok((HessOp::new(&cfg.grid, cfg.spec)?, report))
        })
        .collect::<Result<_>>()?;
    let solutions = solved
        .iter()
        .enumerate()
        .map(|(level, (op, report))| level_solution(&op.geom, report, amplitude, level))
        .collect::<Result<_>>()?;
    let cells = cells
        .iter()
        .map(|probe| CellProbe {
            probe: *probe,
            levels: solved
                .iter()
                .map(|(op, report)| match probe_p(op, &report.u, probe) {
                    Ok(d) => ProbeOutcome::Interior(Box::new(d)),
                    Err(Error::MaxOnBoundary { node }) => ProbeOutcome::OnBoundary { node },
                    Err(e) => ProbeOutcome::Failed(e.to_string()),
                })
                .collect(),
        })
        .collect();
    Ok(ProbeStudy {
        amplitude,
        solutions,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hessop::{ChartBox, Grid};
    use crate::hypgeom::PolarChart;
    use crate::symfunc::QuotientSpec;

    fn geom(nodes: usize) -> GridGeometry {
        let chart = PolarChart::new(2).unwrap();
        GridGeometry::new(&Grid::uniform(chart, ChartBox::annular(2, (-0.5, 0.5), (0.5, 1.5)), nodes).unwrap())
    }

    #[test]
    fn zero_field_has_zero_estimate() {
        let g = geom(9);
        let u = ScalarField::zeros(&g.grid);
        let m = estimate_m(&g, &u, 4.0, HessNorm::Spectral);
        assert_eq!(m.value, 0.0);
        // ties resolve to the lowest qualifying node
        assert_eq!(m.node, Some(g.grid.node_at(&[2, 2])));
    }

    #[test]
    fn beta_zero_is_plain_hessian_sup() {
        let g = geom(17);
        let u = ScalarField::from_fn(&g.grid, |xi| xi[1].cosh() - 1.5f64.cosh());
        let m = estimate_m(&g, &u, 0.0, HessNorm::Spectral);
        let direct = deep_nodes(&g)
            .iter()
            .map(|&p| HessNorm::Spectral.apply(&covariant_hessian(&g, &u.values, p).unwrap()))
            .fold(0.0, f64::max);
        assert_eq!(m.value, direct);
    }

    #[test]
    fn norms() {
        let h = SymMat::from_diag(&[-3.0, 2.0]);
        assert_eq!(HessNorm::Spectral.apply(&h), 3.0);
        assert_eq!(HessNorm::LargestEigenvalue.apply(&h), 2.0);
        assert!((HessNorm::Frobenius.apply(&h) - 13f64.sqrt()).abs() < 1e-15);
        assert_eq!(HessNorm::parse("lambda_max"), Some(HessNorm::LargestEigenvalue));
    }

    #[test]
    fn stabilization_rule() {
        assert!(cauchy_stabilized(1.0, 1.5, 1.6));
        assert!(!cauchy_stabilized(1.0, 1.1, 2.0));
        assert!(cauchy_stabilized(5.0, 5.0, 5.0));
    }

    #[test]
    fn probe_rejects_bad_constants() {
        assert!(ProbeConfig::new(0.0, 0.1, 1.0).is_err());
        assert!(ProbeConfig::new(4.0, 0.1, 1.0).is_ok());
    }

    #[test]
    fn probe_on_a_convex_field() {
        // angular damping puts the maximum of P inside
        let g = geom(33);
        let spec = QuotientSpec::new(2, 2, 0, 1.0).unwrap();
        let op = HessOp::new(&g.grid, spec).unwrap();
        let u = ScalarField::from_fn(&g.grid, |xi| {
            (xi[1].cosh() - 1.6f64.cosh()) * (1.0 - 0.02 * xi[0] * xi[0])
        });
        let probe = ProbeConfig::new(1.0, 0.1, 1.0).unwrap();
        let d = probe_p(&op, &u, &probe).unwrap();
        assert!(d.f_ordered && d.t_ordered);
        assert!(d.hess_eigs[0] >= d.hess_eigs[1]);
        let expect = probe.big_a * d.t_diag[0] / d.c_plus.tanh();
        assert!((d.final_term - expect).abs() <= 1e-14 * expect);
    }
}
