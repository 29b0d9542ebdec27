//! Damped Newton with a Garding-cone line-search safeguard, amplitude
//! continuation and the Poisson initial guess.

use crate::error::{Error, Result};
use crate::hessop::{covariant_hessian, grad_norm_sq, Grid, HessOp, RhsSpec, ScalarField, Source};
use crate::sparse::{bicgstab, CsrMatrix};
use crate::symfunc::QuotientSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub spec: QuotientSpec,
    pub grid: Grid,
    pub rhs: RhsSpec,
    pub continuation_steps: usize,
    /// Max-norm residual tolerance.
    pub newton_tol: f64,
    pub max_newton: usize,
    pub backtrack: f64,
    /// Minimum relative cone margin accepted by the line search.
    pub cone_margin: f64,
    pub linear_tol: f64,
    pub max_linear: usize,
    /// Scale of the Poisson guess `Lap u0 = c`; `None` matches the target amplitude.
    pub init_c: Option<f64>,
}

impl SolveConfig {
    pub fn new(spec: QuotientSpec, grid: Grid, rhs: RhsSpec) -> Self {
        SolveConfig {
            spec,
            grid,
            rhs,
            continuation_steps: 1,
            newton_tol: 1e-9,
            max_newton: 50,
            backtrack: 0.5,
            cone_margin: 1e-8,
            linear_tol: 1e-10,
            max_linear: 20_000,
            init_c: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidInput(what.to_string()));
        if self.continuation_steps == 0 {
            return bad("continuation steps must be at least 1");
        }
        if !(self.newton_tol > 0.0) || !(self.linear_tol > 0.0) || !(self.cone_margin > 0.0) {
            return bad("tolerances and the cone margin must be positive");
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad("backtracking factor must lie in (0, 1)");
        }
        if self.max_newton == 0 || self.max_linear == 0 {
            return bad("iteration limits must be positive");
        }
        if let Some(c) = self.init_c {
            if !(c > 0.0) || !c.is_finite() {
                return bad("init_c must be positive");
            }
        }
        if self.grid.dim() != self.spec.n {
            return bad("grid dimension does not match n");
        }
        self.rhs.validate()
    }
}

/// One accepted Newton iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateRecord {
    pub step: usize,
    pub iteration: usize,
    /// Continuation amplitude; `None` for a direct Newton solve.
    pub amplitude: Option<f64>,
    /// Max-norm residual before the update.
    pub residual: f64,
    /// Accepted step length; 0 for the terminal record.
    pub alpha: f64,
    /// Trial steps rejected because they left the cone.
    pub cone_rejections: usize,
    /// Trial steps rejected because the residual did not decrease.
    pub merit_rejections: usize,
    pub linear_iterations: usize,
    /// Minimum relative cone margin of the iterate.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub u: ScalarField,
    pub amplitudes: Vec<f64>,
    pub iterates: Vec<IterateRecord>,
    /// Cone-safeguard activations over the whole solve.
    pub safeguard_activations: usize,
    pub final_residual: f64,
    pub sup_u: f64,
    pub sup_grad: f64,
    /// Minimum relative cone margin of the final field.
    pub certificate: f64,
    /// `None` for a direct Newton solve.
    pub init_c: Option<f64>,
    pub init: Option<InitMethod>,
}

impl SolveReport {
    pub fn residual_history(&self) -> Vec<f64> {
        self.iterates.iter().map(|r| r.residual).collect()
    }

    pub fn newton_iterations(&self) -> usize {
        self.iterates.iter().filter(|r| r.alpha > 0.0).count()
    }
}

/// How the admissible starting field was obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum InitMethod {
    /// `c w_j` with `Lap w = 1`, accepted at the given attempt.
    Poisson { attempts: usize },
    /// The Poisson guess is admissible only for a larger `tau`; Newton solutions
    /// are carried down along the recorded `tau` path to the target.
    TauHomotopy { path: Vec<f64> },
}

/// Admissible starting field for the target operator.
#[derive(Debug, Clone, PartialEq)]
pub struct InitGuess {
    pub u: ScalarField,
    pub c: f64,
    pub margin: f64,
    pub method: InitMethod,
    /// Amplitude whose right-hand side the field solves (homotopy) or matches (Poisson).
    pub amplitude: f64,
}

/// Solves `Lap w = 1`, `w = 0` on the boundary.
pub fn unit_poisson(op: &HessOp, linear_tol: f64, max_linear: usize) -> Result<ScalarField> {
    let lap: CsrMatrix = op.laplacian();
    let ones = vec![1.0; op.interior().len()];
    let (w, _) = bicgstab(&lap, &ones, linear_tol, max_linear)?;
    let mut field = ScalarField::zeros(op.grid());
    op.scatter(&w, &mut field.values);
    Ok(field)
}

fn mean_operator_value(op: &HessOp, u: &[f64]) -> Result<f64> {
    let states = op.states(u)?;
    let total: f64 = states.iter().filter_map(|s| s.f_value()).sum();
    Ok(total / states.len() as f64)
}

/// Mean of `f^(1/m)` over interior nodes at `u`.
fn mean_source_root<S: Source + ?Sized>(op: &HessOp, u: &[f64], src: &S) -> f64 {
    let m = op.spec.order() as f64;
    let total: f64 = op
        .interior()
        .iter()
        .map(|&p| {
            let g = grad_norm_sq(&op.geom, u, p);
            src.eval(p, op.geom.coords(p), u[p], g).value.powf(1.0 / m)
        })
        .sum();
    total / op.interior().len() as f64
}

/// Scale `c` of an admissible shape: `init_c`, or the value whose mean `F` matches
/// the mean of `f^(1/m)` at the target amplitude.
fn init_scale(op: &HessOp, shape: &[f64], config: &SolveConfig) -> Result<f64> {
    match config.init_c {
        Some(c) => Ok(c),
        None => {
            let f_unit = mean_operator_value(op, shape)?;
            let target = mean_source_root(op, &vec![0.0; shape.len()], &config.rhs);
            Ok(target / f_unit)
        }
    }
}

/// Admissible initial guess `u0 = c w` with `Lap w = 1`.
///
/// The cone is scale invariant, so instead of rescaling `c` a rejected guess is
/// sharpened, `w_j = -|w|_max (-w / |w|_max)^(1 - j/16)`, which adds positive
/// curvature across the level sets; up to 8 attempts.
pub fn poisson_init(config: &SolveConfig) -> Result<InitGuess> {
    config.validate()?;
    let op = HessOp::new(&config.grid, config.spec)?;
    let w = unit_poisson(&op, config.linear_tol, config.max_linear)?;
    poisson_init_with(&op, config, &w)
}

fn poisson_init_with(op: &HessOp, config: &SolveConfig, w: &ScalarField) -> Result<InitGuess> {
    let w_max = w.max_abs();
    for attempt in 0..8 {
        let e = 1.0 - attempt as f64 / 16.0;
        let shape: Vec<f64> = w
            .values
            .iter()
            .map(|&v| -w_max * (-v / w_max).max(0.0).powf(e))
            .collect();
        if op.min_cone_margin(&shape) < config.cone_margin {
            continue;
        }
        let c = init_scale(op, &shape, config)?;
        let u = ScalarField {
            values: shape.iter().map(|v| c * v).collect(),
        };
        let amplitude = matched_amplitude(op, &u.values, &config.rhs)?;
        return Ok(InitGuess {
            margin: op.min_cone_margin(&u.values),
            u,
            c,
            method: InitMethod::Poisson {
                attempts: attempt + 1,
            },
            amplitude,
        });
    }
    Err(Error::InitFailure { attempts: 8 })
}

/// Largest number of `tau` steps tried by the homotopy.
const MAX_TAU_STEPS: usize = 200;

/// Carries a Newton solution from a large `tau`, where the Poisson guess is
/// admissible, down to the target `tau` with adaptive steps.
fn tau_homotopy_init(op: &HessOp, config: &SolveConfig, w: &ScalarField) -> Result<InitGuess> {
    let target = config.spec.tau;
    // tr H(w) = 1, so U = tau I - H(w) lies in Gamma_n once tau exceeds every eigenvalue
    let h_max = op
        .interior()
        .iter()
        .map(|&p| {
            let h = covariant_hessian(&op.geom, &w.values, p).expect("interior node");
            *h.eigen().eigenvalues.last().unwrap()
        })
        .fold(0.0, f64::max);
    let mut tau = (2.0 * h_max).max(2.0 * target);
    let mut start = None;
    for _ in 0..8 {
        let op_t = op.with_tau(tau)?;
        if op_t.min_cone_margin(&w.values) >= config.cone_margin {
            start = Some(op_t);
            break;
        }
        tau *= 2.0;
    }
    let op_t = start.ok_or(Error::InitFailure { attempts: 8 })?;
    let c = init_scale(&op_t, &w.values, config)?;
    let mut u: Vec<f64> = w.values.iter().map(|v| c * v).collect();
    let amplitude = matched_amplitude(&op_t, &u, &config.rhs)?;
    let src = config.rhs.with_amplitude(amplitude);
    let mut scratch = Vec::new();
    Newton { op: &op_t, config }.run(&mut u, &src, 0, Some(amplitude), &mut scratch)?;

    let mut path = vec![tau];
    let mut tries = 0;
    while tau > target {
        tries += 1;
        if tries > MAX_TAU_STEPS {
            return Err(Error::InitFailure { attempts: tries });
        }
        // tangent predictor du/dtau = -J^{-1} dr/dtau, with dr/dtau = tr(F^{ij}) tr(H)
        let op_c = op.with_tau(tau)?;
        let jac = op_c.linearize(&u, &src)?;
        let dr: Vec<f64> = op_c
            .states(&u)?
            .iter()
            .map(|st| {
                let op = st.operator.as_ref().expect("accepted iterate is admissible");
                -op.frame_grad.iter().sum::<f64>() * st.hessian.trace()
            })
            .collect();
        let (tangent, _) = bicgstab(&jac, &dr, config.linear_tol, config.max_linear)?;
        let predict = |t: f64| -> Vec<f64> {
            let mut v = u.clone();
            for (j, &p) in op.interior().iter().enumerate() {
                v[p] += (t - tau) * tangent[j];
            }
            v
        };
        // the smallest tau keeping a small part of the current margin along the tangent
        let margin_at = |t: f64| -> Result<f64> { Ok(op.with_tau(t)?.min_cone_margin(&predict(t))) };
        let keep = (1e-3 * margin_at(tau)?).max(10.0 * config.cone_margin);
        let mut next = if margin_at(target)? >= keep {
            target
        } else {
            let (mut lo, mut hi) = (target, tau);
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                if margin_at(mid)? >= keep {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        };
        loop {
            let op_n = op.with_tau(next)?;
            let mut trial = predict(next);
            let ok = op_n.min_cone_margin(&trial) >= config.cone_margin
                && Newton {
                    op: &op_n,
                    config,
                }
                .run(&mut trial, &src, 0, Some(amplitude), &mut scratch)
                .is_ok();
            if ok {
                u = trial;
                break;
            }
            next = 0.5 * (next + tau);
            if tau - next <= 1e-12 * tau {
                return Err(Error::InitFailure { attempts: tries });
            }
        }
        if (tau - next).abs() <= 1e-12 * tau && next > target {
            return Err(Error::InitFailure { attempts: tries });
        }
        tau = next;
        path.push(tau);
    }
    Ok(InitGuess {
        margin: op.min_cone_margin(&u),
        u: ScalarField { values: u },
        c,
        method: InitMethod::TauHomotopy { path },
        amplitude,
    })
}

/// Poisson guess if admissible for the target operator, the `tau` homotopy otherwise.
pub fn admissible_init(config: &SolveConfig) -> Result<InitGuess> {
    config.validate()?;
    let op = HessOp::new(&config.grid, config.spec)?;
    admissible_init_with(&op, config)
}

fn admissible_init_with(op: &HessOp, config: &SolveConfig) -> Result<InitGuess> {
    let w = unit_poisson(op, config.linear_tol, config.max_linear)?;
    match poisson_init_with(op, config, &w) {
        Err(Error::InitFailure { .. }) => tau_homotopy_init(op, config, &w),
        other => other,
    }
}

/// Amplitude at which the closed-form right-hand side best matches `F(U[u])`
/// on average: `mean F / mean (f / A)^(1/m)`, raised to the power `m`.
pub fn matched_amplitude(op: &HessOp, u: &[f64], rhs: &RhsSpec) -> Result<f64> {
    let m = op.spec.order() as f64;
    let unit = rhs.with_amplitude(1.0);
    let f = mean_operator_value(op, u)?;
    let g = mean_source_root(op, u, &unit);
    Ok((f / g).powf(m))
}

struct Newton<'a> {
    op: &'a HessOp,
    config: &'a SolveConfig,
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl Newton<'_> {
    fn run<S: Source + ?Sized>(
        &self,
        u: &mut [f64],
        src: &S,
        step: usize,
        amplitude: Option<f64>,
        log: &mut Vec<IterateRecord>,
    ) -> Result<usize> {
        let op = self.op;
        let cfg = self.config;
        let mut r = op.residual(u, src)?;
        let mut safeguards = 0;
        for iteration in 0..=cfg.max_newton {
            let res = max_norm(&r);
            let margin = op.min_cone_margin(u);
            if res <= cfg.newton_tol {
                log.push(IterateRecord {
                    step,
                    iteration,
                    amplitude,
                    residual: res,
                    alpha: 0.0,
                    cone_rejections: 0,
                    merit_rejections: 0,
                    linear_iterations: 0,
                    margin,
                });
                return Ok(safeguards);
            }
            if iteration == cfg.max_newton {
                return Err(Error::MaxIterations {
                    iterations: cfg.max_newton,
                    residual: res,
                });
            }
            let jac = op.linearize(u, src)?;
            let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
            let (delta, stats) = bicgstab(&jac, &rhs, cfg.linear_tol, cfg.max_linear)?;
            let merit = l2(&r);
            let mut alpha = 1.0;
            let mut cone_rejections = 0;
            let mut merit_rejections = 0;
            let mut trial = u.to_vec();
            loop {
                if alpha < 1e-8 {
                    return Err(Error::LineSearchStall {
                        iteration,
                        alpha,
                        residual: res,
                    });
                }
                for (j, &p) in op.interior().iter().enumerate() {
                    trial[p] = u[p] + alpha * delta[j];
                }
                if op.min_cone_margin(&trial) < cfg.cone_margin {
                    cone_rejections += 1;
                    alpha *= cfg.backtrack;
                    continue;
                }
                let r_trial = op.residual(&trial, src)?;
                if l2(&r_trial) < (1.0 - 1e-4 * alpha) * merit || max_norm(&r_trial) <= cfg.newton_tol {
                    r = r_trial;
                    break;
                }
                merit_rejections += 1;
                alpha *= cfg.backtrack;
            }
            safeguards += cone_rejections;
            log.push(IterateRecord {
                step,
                iteration,
                amplitude,
                residual: res,
                alpha,
                cone_rejections,
                merit_rejections,
                linear_iterations: stats.iterations,
                margin,
            });
            u.copy_from_slice(&trial);
        }
        unreachable!("loop returns at max_newton")
    }
}

fn finish(
    op: &HessOp,
    u: Vec<f64>,
    amplitudes: Vec<f64>,
    iterates: Vec<IterateRecord>,
    safeguard_activations: usize,
    init_c: Option<f64>,
) -> SolveReport {
    let final_residual = iterates.last().map(|r| r.residual).unwrap_or(f64::NAN);
    let sup_u = max_norm(&u);
    let sup_grad = (0..u.len())
        .map(|p| grad_norm_sq(&op.geom, &u, p).sqrt())
        .fold(0.0, f64::max);
    let certificate = op.min_cone_margin(&u);
    SolveReport {
        u: ScalarField { values: u },
        amplitudes,
        iterates,
        safeguard_activations,
        final_residual,
        sup_u,
        sup_grad,
        certificate,
        init_c,
        init: None,
    }
}

/// Newton from an admissible field; boundary values of `u_init` are kept.
pub fn newton_solve<S: Source + ?Sized>(
    u_init: &ScalarField,
    src: &S,
    config: &SolveConfig,
) -> Result<SolveReport> {
    config.validate()?;
    let op = HessOp::new(&config.grid, config.spec)?;
    let margin = op.min_cone_margin(&u_init.values);
    if margin < config.cone_margin {
        return Err(Error::Inadmissible(format!(
            "initial field has cone margin {margin:e}"
        )));
    }
    let mut u = u_init.values.clone();
    let mut log = Vec::new();
    let newton = Newton { op: &op, config };
    let safeguards = newton.run(&mut u, src, 1, None, &mut log)?;
    Ok(finish(&op, u, vec![], log, safeguards, None))
}

/// Admissible initial guess, then Newton at geometrically ramped amplitudes
/// from the init-matched amplitude to the target.
pub fn continuation_solve(config: &SolveConfig) -> Result<SolveReport> {
    config.validate()?;
    let op = HessOp::new(&config.grid, config.spec)?;
    let init = admissible_init_with(&op, config)?;
    let m = config.continuation_steps;
    let target = config.rhs.amplitude;
    let start = init.amplitude;
    let amplitudes: Vec<f64> = (1..=m)
        .map(|j| {
            if j == m {
                target
            } else {
                start * (target / start).powf(j as f64 / m as f64)
            }
        })
        .collect();
    let mut u = init.u.values.clone();
    let mut log = Vec::new();
    let mut safeguards = 0;
    let newton = Newton { op: &op, config };
    for (j, &amp) in amplitudes.iter().enumerate() {
        let src = config.rhs.with_amplitude(amp);
        safeguards += newton
            .run(&mut u, &src, j + 1, Some(amp), &mut log)
            .map_err(|e| Error::Continuation {
                step: j + 1,
                steps: m,
                amplitude: amp,
                source: Box::new(e),
            })?;
    }
    let mut report = finish(&op, u, amplitudes, log, safeguards, Some(init.c));
    report.init = Some(init.method);
    Ok(report)
}
