mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use hessquot::checks::{self, SuiteReport};
use hessquot::config::RunConfig;
use hessquot::pogorelov::{probe_study, refine_sweep, EstimateReport, ProbeOutcome, ProbeStudy};
use hessquot::solver::{continuation_solve, InitMethod, SolveReport};
use hessquot::Error;

use output::{num, opt, Csv, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Command {
    /// Symmetric-function, operator and geometry suites.
    Check,
    /// One solve on the configured grid.
    Solve,
    /// `M_h(beta)` table over the sweep lists.
    Estimate,
    /// Maximum-principle probe on every level.
    Probe,
    /// Full refinement sweep with per-cell files.
    Sweep,
}

#[derive(Debug, Parser)]
#[command(name = "hessquot", version, about = "Hessian quotient equations on hyperbolic space")]
struct Args {
    command: Command,
    /// Run configuration (optional for `check`).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error("configuration error: {0}")]
    Config(Error),
    #[error("solver failure: {0}")]
    Solver(Error),
    #[error("{0} check(s) failed")]
    Checks(usize),
    #[error("{0}")]
    Io(Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Checks(_) => 4,
            Failure::Io(_) => 5,
        }
    }
}

/// Sorts library errors raised while running a command; anything that is
/// neither I/O nor a solver failure traces back to the configuration.
fn classify(e: Error) -> Failure {
    match e {
        Error::Io { .. } => Failure::Io(e),
        e if e.is_solver_failure() => Failure::Solver(e),
        e => Failure::Config(e),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("hessquot: {f}");
            ExitCode::from(f.code())
        }
    }
}

fn run(args: &Args) -> Result<(), Failure> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(Error::InvalidInput(format!("--threads {n}: {e}"))))?;
    }
    let config = match &args.config {
        Some(path) => Some(RunConfig::from_file(path).map_err(|e| match e {
            Error::Io { .. } => Failure::Io(e),
            e => Failure::Config(e),
        })?),
        None if args.command == Command::Check => None,
        None => {
            return Err(Failure::Config(Error::InvalidInput(
                "--config is required for this command".into(),
            )))
        }
    };
    if let Some(c) = &config {
        for notice in c.notices() {
            eprintln!("{notice}");
        }
    }
    let out = args
        .out
        .clone()
        .or_else(|| config.as_ref().and_then(|c| c.output_dir.clone()));
    let hash = config.as_ref().map_or_else(|| "none".to_string(), RunConfig::hash);
    if let (Some(c), Some(dir)) = (&config, &out) {
        c.write_resolved(dir).map_err(Failure::Io)?;
    }

    if args.command == Command::Check {
        return check(out.as_deref(), &hash);
    }
    let (config, out) = match (config, out) {
        (Some(c), Some(o)) => (c, o),
        _ => {
            return Err(Failure::Config(Error::InvalidInput(
                "an output directory is required (--out or output.dir)".into(),
            )))
        }
    };
    match args.command {
        Command::Check => unreachable!(),
        Command::Solve => solve(&config, &out, &hash),
        Command::Estimate => estimate(&config, &out, &hash, false),
        Command::Sweep => estimate(&config, &out, &hash, true),
        Command::Probe => probe(&config, &out, &hash),
    }
}

fn check(out: Option<&Path>, hash: &str) -> Result<(), Failure> {
    let seed = checks::seed_from_env();
    let suites = checks::all_suites(seed).map_err(classify)?;
    for s in &suites {
        println!("{s}");
    }
    if let Some(dir) = out {
        write_checks(&suites, dir, hash).map_err(Failure::Io)?;
    }
    let failed: usize = suites
        .iter()
        .map(|s| s.failures().len() + usize::from(s.elapsed > s.budget))
        .sum();
    if failed > 0 {
        return Err(Failure::Checks(failed));
    }
    println!("all checks passed");
    Ok(())
}

fn write_checks(suites: &[SuiteReport], dir: &Path, hash: &str) -> Result<(), Error> {
    let mut csv = Csv::new(hash, &["suite", "seed", "check", "value", "bound", "pass"]);
    for s in suites {
        for r in &s.rows {
            csv.row(vec![
                s.name.to_string(),
                s.seed.to_string(),
                r.name.replace(',', ";"),
                num(r.value),
                r.bound.to_string().replace(',', ";"),
                r.pass.to_string(),
            ]);
        }
    }
    csv.write(&dir.join("check.csv"))
}

fn describe_init(report: &SolveReport) -> String {
    match &report.init {
        Some(InitMethod::Poisson { attempts }) => format!("poisson (attempt {attempts}, c = {})", report.init_c.map_or("?".to_string(), num)),
        Some(InitMethod::TauHomotopy { path }) => format!("tau homotopy along {path:?}"),
        None => "supplied".to_string(),
    }
}

fn solve(config: &RunConfig, out: &Path, hash: &str) -> Result<(), Failure> {
    let cfg = config.solve_config().map_err(Failure::Config)?;
    let report = continuation_solve(&cfg).map_err(classify)?;
    let grid = &cfg.grid;
    let n = grid.dim();

    let mut header: Vec<String> = (1..=n).map(|a| format!("xi{a}")).collect();
    header.extend(["boundary".to_string(), "u".to_string()]);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = Csv::new(hash, &header);
    for p in 0..grid.len() {
        let mut row: Vec<String> = grid.coords(p).into_iter().map(num).collect();
        row.push(u8::from(grid.is_boundary(p)).to_string());
        row.push(num(report.u.values[p]));
        csv.row(row);
    }
    csv.write(&out.join("u.csv")).map_err(Failure::Io)?;

    let mut hist = Csv::new(
        hash,
        &["step", "iteration", "amplitude", "residual", "alpha", "cone_rejections", "merit_rejections", "linear_iterations", "margin"],
    );
    for r in &report.iterates {
        hist.row(vec![
            r.step.to_string(),
            r.iteration.to_string(),
            r.amplitude.map_or(String::new(), num),
            num(r.residual),
            num(r.alpha),
            r.cone_rejections.to_string(),
            r.merit_rejections.to_string(),
            r.linear_iterations.to_string(),
            num(r.margin),
        ]);
    }
    hist.write(&out.join("residuals.csv")).map_err(Failure::Io)?;

    let mut rep = Report::new("hessquot solve", hash);
    rep.kv("grid", format!("{:?}", grid.dims()));
    rep.kv("init", describe_init(&report));
    rep.kv("continuation_amplitudes", format!("{:?}", report.amplitudes));
    rep.kv("newton_iterations", report.newton_iterations());
    rep.kv("safeguard_activations", report.safeguard_activations);
    rep.kv("final_residual", num(report.final_residual));
    rep.kv("sup_abs_u", num(report.sup_u));
    rep.kv("sup_grad_u", num(report.sup_grad));
    rep.kv("cone_certificate", num(report.certificate));
    rep.write(&out.join("report.txt")).map_err(Failure::Io)?;
    print!("{}", rep.as_str());
    Ok(())
}

fn estimate(config: &RunConfig, out: &Path, hash: &str, full: bool) -> Result<(), Failure> {
    let base = config.solve_config().map_err(Failure::Config)?;
    let report = refine_sweep(&base, config.levels, &config.betas, &config.amplitudes, config.norm)
        .map_err(classify)?;
    if report.solutions.is_empty() {
        let first = report.failures.first().map_or("no solves ran".to_string(), |f| f.message.clone());
        return Err(Failure::Solver(Error::InvalidInput(format!("every solve failed: {first}"))));
    }
    let name = if full { "sweep.csv" } else { "estimate.csv" };
    estimate_table(&report, hash, None, full)
        .write(&out.join(name))
        .map_err(Failure::Io)?;
    if full {
        // per-cell files first, then the merged table above in a fixed order
        for cell in &report.cells {
            let file = format!("cells/beta_{}_amp_{}.csv", cell.beta, cell.amplitude);
            estimate_table(&report, hash, Some((cell.beta, cell.amplitude)), true)
                .write(&out.join(file))
                .map_err(Failure::Io)?;
        }
        let mut sol = Csv::new(
            hash,
            &["amplitude", "level", "h", "sup_abs_u", "sup_grad_u", "c_minus", "c_plus", "newton_iterations", "certificate"],
        );
        for s in &report.solutions {
            sol.row(vec![
                num(s.amplitude),
                s.level.to_string(),
                num(s.h),
                num(s.sup_u),
                num(s.sup_grad),
                num(s.c_minus),
                num(s.c_plus),
                s.newton_iterations.to_string(),
                num(s.certificate),
            ]);
        }
        sol.write(&out.join("solutions.csv")).map_err(Failure::Io)?;
    }

    let mut rep = Report::new(if full { "hessquot sweep" } else { "hessquot estimate" }, hash);
    rep.kv("norm", report.norm.name());
    for cell in &report.cells {
        rep.kv(
            &format!("stabilized beta={} A_f={}", cell.beta, cell.amplitude),
            cell.stabilized.map_or("undetermined".to_string(), |s| s.to_string()),
        );
    }
    rep.kv(
        "smallest_stabilizing_beta",
        report
            .smallest_stabilizing_beta()
            .map_or("none".to_string(), |b| b.to_string()),
    );
    for f in &report.failures {
        rep.kv(&format!("failure A_f={} level={}", f.amplitude, f.level), &f.message);
    }
    let txt = if full { "sweep.txt" } else { "estimate.txt" };
    rep.write(&out.join(txt)).map_err(Failure::Io)?;
    print!("{}", rep.as_str());
    Ok(())
}

/// One row per (cell, level); `only` restricts to one cell.
fn estimate_table(report: &EstimateReport, hash: &str, only: Option<(f64, f64)>, full: bool) -> Csv {
    let mut header = vec!["h", "beta", "amplitude", "level", "M", "sup_abs_u", "sup_grad_u", "stabilized", "solved"];
    if full {
        header.extend(["M_spectral", "M_lambda_max", "M_frobenius", "node"]);
    }
    let mut csv = Csv::new(hash, &header);
    for cell in &report.cells {
        if only.is_some_and(|(b, a)| (b, a) != (cell.beta, cell.amplitude)) {
            continue;
        }
        let flag = cell.stabilized.map_or("undetermined".to_string(), |s| s.to_string());
        for (level, est) in cell.levels.iter().enumerate() {
            let h = report
                .solutions
                .iter()
                .find(|s| s.level == level)
                .map(|s| s.h);
            let mut row = vec![
                opt(est.as_ref().map(|e| e.h).or(h)),
                num(cell.beta),
                num(cell.amplitude),
                level.to_string(),
                opt(est.as_ref().map(|e| e.m)),
                opt(est.as_ref().map(|e| e.sup_u)),
                opt(est.as_ref().map(|e| e.sup_grad)),
                flag.clone(),
                est.is_some().to_string(),
            ];
            if full {
                row.extend([
                    opt(est.as_ref().map(|e| e.m_spectral)),
                    opt(est.as_ref().map(|e| e.m_lambda_max)),
                    opt(est.as_ref().map(|e| e.m_frobenius)),
                    est.as_ref()
                        .and_then(|e| e.node)
                        .map_or("none".to_string(), |n| n.to_string()),
                ]);
            }
            csv.row(row);
        }
    }
    csv
}

fn probe(config: &RunConfig, out: &Path, hash: &str) -> Result<(), Failure> {
    let base = config.solve_config().map_err(Failure::Config)?;
    let study = probe_study(&base, config.levels, &config.probe_cells).map_err(classify)?;
    probe_table(&study, hash)
        .write(&out.join("probe.csv"))
        .map_err(Failure::Io)?;

    let mut rep = Report::new("hessquot probe", hash);
    rep.kv("amplitude", study.amplitude);
    for cell in &study.cells {
        let p = &cell.probe;
        let label = format!("cell beta={} a={} A={}", p.beta, p.a, p.big_a);
        for (level, o) in cell.levels.iter().enumerate() {
            let state = match o {
                ProbeOutcome::Interior(d) => format!("interior maximum at node {} {:?}", d.node, d.coords),
                ProbeOutcome::OnBoundary { node } => format!("MaxOnBoundary at node {node}"),
                ProbeOutcome::Failed(m) => format!("failed: {m}"),
            };
            rep.kv(&format!("{label} level {level}"), state);
        }
        match cell.verdict() {
            Some(v) => {
                rep.kv(&format!("{label} dif1_order"), num(v.dif1_order));
                rep.kv(&format!("{label} eps_h"), format!("{:?}", v.eps));
                rep.kv(&format!("{label} eps_nonincreasing"), v.eps_nonincreasing);
                rep.kv(&format!("{label} finest_tp"), num(*v.tp.last().unwrap_or(&f64::NAN)));
                rep.kv(&format!("{label} finest_tolerance"), num(v.tolerance));
                rep.kv(&format!("{label} orderings"), v.orderings);
                rep.kv(&format!("{label} passed"), v.passed());
            }
            None => rep.kv(&format!("{label} verdict"), "not evaluated"),
        }
    }
    rep.kv(
        "selected_cell",
        study.selected().map_or("none".to_string(), |c| {
            format!("beta={} a={} A={}", c.probe.beta, c.probe.a, c.probe.big_a)
        }),
    );
    rep.write(&out.join("probe.txt")).map_err(Failure::Io)?;
    print!("{}", rep.as_str());
    Ok(())
}

fn probe_table(study: &ProbeStudy, hash: &str) -> Csv {
    let mut csv = Csv::new(
        hash,
        &["beta", "a", "A", "level", "h", "outcome", "node", "p_value", "dif1_norm", "tp_sum", "eps_h", "final_term", "f_ordered", "t_ordered"],
    );
    for cell in &study.cells {
        let p = &cell.probe;
        for (level, o) in cell.levels.iter().enumerate() {
            let h = study.solutions.get(level).map(|s| s.h);
            let mut row = vec![num(p.beta), num(p.a), num(p.big_a), level.to_string(), opt(h)];
            match o {
                ProbeOutcome::Interior(d) => row.extend([
                    "interior".to_string(),
                    d.node.to_string(),
                    num(d.p_value),
                    num(d.dif1_norm),
                    num(d.tp_sum),
                    num(d.eps_h),
                    num(d.final_term),
                    d.f_ordered.to_string(),
                    d.t_ordered.to_string(),
                ]),
                ProbeOutcome::OnBoundary { node } => {
                    row.extend(["max_on_boundary".to_string(), node.to_string()]);
                    row.extend(std::iter::repeat_n("nan".to_string(), 5));
                    row.extend(["false".to_string(), "false".to_string()]);
                }
                ProbeOutcome::Failed(_) => {
                    row.extend(["failed".to_string(), "none".to_string()]);
                    row.extend(std::iter::repeat_n("nan".to_string(), 5));
                    row.extend(["false".to_string(), "false".to_string()]);
                }
            }
            csv.row(row);
        }
    }
    csv
}
