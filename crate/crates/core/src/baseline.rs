//! The committed two-dimensional Monge-Ampere baseline used by the estimate sweep,
//! the probe and the geometry checks.

use crate::error::Result;
use crate::hessop::{ChartBox, Grid, RhsSpec};
use crate::hypgeom::PolarChart;
use crate::pogorelov::ProbeConfig;
use crate::solver::SolveConfig;
use crate::symfunc::QuotientSpec;

pub const ANGULAR: (f64, f64) = (-0.2, 0.2);
pub const RADIAL: (f64, f64) = (0.5, 1.5);
/// Nodes per axis on the coarsest level; each refinement halves the spacing.
pub const COARSE_NODES: usize = 13;
pub const LEVELS: usize = 3;
pub const BETAS: [f64; 4] = [1.0, 2.0, 4.0, 8.0];
pub const AMPLITUDES: [f64; 3] = [1.0, 2.0, 4.0];
/// Probe cells in the order they are tried; the first is the primary one.
pub const PROBE_CELLS: [(f64, f64, f64); 3] = [(4.0, 0.1, 1.0), (4.0, 1.0, 4.0), (8.0, 0.1, 1.0)];

pub fn spec() -> QuotientSpec {
    QuotientSpec::new(2, 2, 0, 1.0).expect("baseline spec is valid")
}

pub fn chart_box() -> ChartBox {
    ChartBox::annular(2, ANGULAR, RADIAL)
}

/// Grid at `level` (0 is the coarsest).
pub fn grid(level: usize) -> Result<Grid> {
    let mut g = Grid::uniform(PolarChart::new(2)?, chart_box(), COARSE_NODES)?;
    for _ in 0..level {
        g = g.refined();
    }
    Ok(g)
}

/// Solve configuration on the coarsest grid with `f = amplitude`.
pub fn solve_config(amplitude: f64) -> Result<SolveConfig> {
    Ok(SolveConfig::new(spec(), grid(0)?, RhsSpec::constant(amplitude)))
}

pub fn probe_cells() -> Result<Vec<ProbeConfig>> {
    PROBE_CELLS
        .iter()
        .map(|&(beta, a, big_a)| ProbeConfig::new(beta, a, big_a))
        .collect()
}
