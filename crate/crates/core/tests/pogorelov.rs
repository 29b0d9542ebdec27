use hessquot::baseline;
use hessquot::hessop::{ChartBox, Grid, GridGeometry, HessOp, ScalarField};
use hessquot::hypgeom::PolarChart;
use hessquot::oracle::{random_orthogonal, random_symmetric};
use hessquot::pogorelov::{
    cauchy_stabilized, estimate_m, grid_dist_bounds, probe_p, probe_study, refine_sweep,
    HessNorm, ProbeConfig, DIF1_MIN_ORDER,
};
use hessquot::solver::continuation_solve;
use hessquot::{Error, QuotientSpec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn geom(nodes: usize) -> GridGeometry {
    let chart = PolarChart::new(2).unwrap();
    GridGeometry::new(&Grid::uniform(chart, ChartBox::annular(2, (-0.5, 0.5), (0.5, 1.5)), nodes).unwrap())
}

fn bowl(g: &Grid) -> ScalarField {
    ScalarField::from_fn(g, |x| (x[1].cosh() - 1.6f64.cosh()) * (1.0 - 0.02 * x[0] * x[0]))
}

#[test]
fn estimate_examples() {
    let g = geom(17);
    assert_eq!(estimate_m(&g, &ScalarField::zeros(&g.grid), 2.0, HessNorm::Spectral).value, 0.0);
    let u = bowl(&g.grid);
    for norm in HessNorm::ALL {
        for beta in [0.0, 1.0, 4.0] {
            let m = estimate_m(&g, &u, beta, norm);
            let node = m.node.unwrap();
            assert!(g.grid.boundary_distance(node) >= 2);
            // degree beta + 1 in u
            let scaled = ScalarField {
                values: u.values.iter().map(|v| 3.0 * v).collect(),
            };
            let ms = estimate_m(&g, &scaled, beta, norm);
            assert!((ms.value - 3f64.powf(beta + 1.0) * m.value).abs() <= 1e-12 * ms.value);
        }
    }
    let spectral = estimate_m(&g, &u, 2.0, HessNorm::Spectral).value;
    let lmax = estimate_m(&g, &u, 2.0, HessNorm::LargestEigenvalue).value;
    let frob = estimate_m(&g, &u, 2.0, HessNorm::Frobenius).value;
    assert!(lmax <= spectral && spectral <= frob);
}

#[test]
fn estimate_is_invariant_under_reflection() {
    // xi^1 -> -xi^1 maps the symmetric box to itself and is an isometry
    let m = 17;
    let g = geom(m);
    let u = ScalarField::from_fn(&g.grid, |x| (x[1].cosh() - 1.6f64.cosh()) * (1.0 + 0.1 * x[0]));
    let reflected = ScalarField {
        values: (0..g.grid.len())
            .map(|p| {
                let i = g.grid.multi_index(p);
                u[g.grid.node_at(&[m - 1 - i[0], i[1]])]
            })
            .collect(),
    };
    for norm in HessNorm::ALL {
        let a = estimate_m(&g, &u, 4.0, norm).value;
        let b = estimate_m(&g, &reflected, 4.0, norm).value;
        assert!((a - b).abs() <= 1e-12 * a, "{}: {a} vs {b}", norm.name());
    }
}

#[test]
fn norm_names_round_trip() {
    for norm in HessNorm::ALL {
        assert_eq!(HessNorm::parse(norm.name()), Some(norm));
    }
    assert_eq!(HessNorm::parse("operator"), None);
}

#[test]
fn stabilization_rule_examples() {
    assert!(cauchy_stabilized(1.0, 1.5, 1.6));
    assert!(!cauchy_stabilized(1.0, 1.1, 2.0));
    assert!(cauchy_stabilized(2.0, 2.0, 2.0));
    assert!(!cauchy_stabilized(1.0, 1.0, 1.2));
}

#[test]
fn baseline_distance_range() {
    let b = grid_dist_bounds(&GridGeometry::new(&baseline::grid(0).unwrap())).unwrap();
    assert!((b.c_minus - 0.5).abs() < 1e-14);
    assert!((b.c_plus - 1.5).abs() < 1e-14);
    assert!(b.coth_bounds_hold);
}

#[test]
fn baseline_sweep() {
    let base = baseline::solve_config(1.0).unwrap();
    let report = refine_sweep(
        &base,
        baseline::LEVELS,
        &baseline::BETAS,
        &baseline::AMPLITUDES,
        HessNorm::Spectral,
    )
    .unwrap();
    assert!(report.failures.is_empty(), "{:?}", report.failures);
    assert_eq!(report.solutions.len(), 9);
    assert_eq!(report.cells.len(), 12);
    for &a in &baseline::AMPLITUDES {
        let flags: Vec<Option<bool>> = baseline::BETAS
            .iter()
            .map(|&b| report.cell(b, a).unwrap().stabilized)
            .collect();
        assert_eq!(flags, vec![Some(false), Some(true), Some(true), Some(false)], "A_f = {a}");
        let cell = report.cell(4.0, a).unwrap();
        let ms: Vec<f64> = cell.levels.iter().map(|l| l.as_ref().unwrap().m).collect();
        assert!(cauchy_stabilized(ms[0], ms[1], ms[2]));
        for l in cell.levels.iter().flatten() {
            assert_eq!(l.m, l.m_spectral);
            assert!(l.m_lambda_max <= l.m_spectral && l.m_spectral <= l.m_frobenius);
        }
    }
    assert_eq!(report.smallest_stabilizing_beta(), Some(2.0));
    let sups: Vec<f64> = report.sup_u_column().into_iter().map(Option::unwrap).collect();
    assert!(sups.windows(2).all(|w| w[1] > w[0]));
    for s in &report.solutions {
        assert!(s.certificate > 0.0);
        assert_eq!(s.nodes[0], (baseline::COARSE_NODES - 1) * (1 << s.level) + 1);
    }
}

#[test]
fn sweep_rejects_empty_inputs() {
    let base = baseline::solve_config(1.0).unwrap();
    assert!(refine_sweep(&base, 0, &[1.0], &[1.0], HessNorm::Spectral).is_err());
    assert!(refine_sweep(&base, 3, &[], &[1.0], HessNorm::Spectral).is_err());
    assert!(refine_sweep(&base, 3, &[-1.0], &[1.0], HessNorm::Spectral).is_err());
    // fewer than three levels leaves the flag undefined
    let r = refine_sweep(&base, 2, &[2.0], &[1.0], HessNorm::Frobenius).unwrap();
    assert_eq!(r.cells[0].stabilized, None);
    assert_eq!(r.smallest_stabilizing_beta(), None);
}

#[test]
fn probe_on_a_solution() {
    let cfg = baseline::solve_config(1.0).unwrap();
    let report = continuation_solve(&cfg).unwrap();
    let op = HessOp::new(&cfg.grid, cfg.spec).unwrap();
    let probe = ProbeConfig::new(4.0, 0.1, 1.0).unwrap();
    let d = probe_p(&op, &report.u, &probe).unwrap();
    assert!(cfg.grid.boundary_distance(d.node) >= 2);
    assert!(d.hess_eigs.windows(2).all(|w| w[0] >= w[1]));
    assert!(d.f_ordered && d.t_ordered);
    assert_eq!(d.eps_h, d.tp_sum.max(0.0));
    assert!((d.final_term - d.t_diag[0] / d.c_plus.tanh()).abs() <= 1e-14 * d.final_term);
    for (i, e) in d.frame.iter().enumerate() {
        let norm: f64 = e.iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        for f in &d.frame[..i] {
            assert!(e.iter().zip(f).map(|(a, b)| a * b).sum::<f64>().abs() < 1e-12);
        }
    }
}

#[test]
fn probe_failures() {
    let g = geom(17);
    let spec = QuotientSpec::new(2, 2, 0, 1.0).unwrap();
    let op = HessOp::new(&g.grid, spec).unwrap();
    let positive = ScalarField::from_fn(&g.grid, |x| 1.0 + x[1]);
    let probe = ProbeConfig::new(1.0, 0.1, 1.0).unwrap();
    assert!(matches!(probe_p(&op, &positive, &probe), Err(Error::LogDomain(_))));

    // a steep radial weight drives the maximum to the outer face
    let steep = ProbeConfig::new(0.1, 0.1, 200.0).unwrap();
    assert!(matches!(probe_p(&op, &bowl(&g.grid), &steep), Err(Error::MaxOnBoundary { .. })));

    assert!(ProbeConfig::new(4.0, 0.0, 1.0).is_err());
    assert!(ProbeConfig::new(4.0, 0.1, f64::NAN).is_err());
}

#[test]
fn baseline_probe_study() {
    let base = baseline::solve_config(1.0).unwrap();
    let study = probe_study(&base, baseline::LEVELS, &baseline::probe_cells().unwrap()).unwrap();
    let selected = study.selected().unwrap();
    assert_eq!(selected.probe, ProbeConfig::new(4.0, 0.1, 1.0).unwrap());
    let v = selected.verdict().unwrap();
    assert!(v.dif1_order >= DIF1_MIN_ORDER, "{v:?}");
    assert!(v.eps_nonincreasing && v.finest_within_tolerance && v.orderings);
    assert!(v.passed());
    assert!(v.h.windows(2).all(|w| (w[0] / w[1] - 2.0).abs() < 1e-12));
    assert!(study.cells.iter().all(|c| c.all_interior()));
}

proptest! {
    #[test]
    fn norms_are_orthogonally_invariant(seed in any::<u64>(), n in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_symmetric(&mut rng, n);
        let q = random_orthogonal(&mut rng, n);
        let rotated = h.congruence_t(&q);
        for norm in HessNorm::ALL {
            let (a, b) = (norm.apply(&h), norm.apply(&rotated));
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }
}
