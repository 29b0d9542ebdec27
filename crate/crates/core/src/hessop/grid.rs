use crate::error::{Error, Result};
use crate::hypgeom::{Christoffel, PolarChart};

/// Coordinate box `[lo_a, hi_a]` per chart axis; the last axis is radial.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ChartBox {
    /// Every angular axis spans `angular`, the radial axis spans `radial`.
    pub fn annular(n: usize, angular: (f64, f64), radial: (f64, f64)) -> Self {
        let mut lo = vec![angular.0; n];
        let mut hi = vec![angular.1; n];
        lo[n - 1] = radial.0;
        hi[n - 1] = radial.1;
        ChartBox { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn radial_range(&self) -> (f64, f64) {
        let n = self.dim();
        (self.lo[n - 1], self.hi[n - 1])
    }

    pub fn validate(&self, chart: &PolarChart) -> Result<()> {
        let n = chart.dim();
        if self.lo.len() != n || self.hi.len() != n {
            return Err(Error::InvalidInput(format!("box must have {n} axes")));
        }
        for a in 0..n {
            if !(self.lo[a] < self.hi[a]) || !self.lo[a].is_finite() || !self.hi[a].is_finite() {
                return Err(Error::InvalidInput(format!(
                    "axis {a}: bounds [{}, {}] are not an interval",
                    self.lo[a], self.hi[a]
                )));
            }
        }
        // the corners bound every cos factor and the radial minimum
        let r_min = self.lo[n - 1];
        for a in 0..n.saturating_sub(2) {
            let worst = self.lo[a].abs().max(self.hi[a].abs());
            let mut probe = vec![0.0; n];
            probe[a] = worst;
            probe[n - 1] = r_min;
            chart.check_admissible(&probe, r_min)?;
        }
        if !(r_min > 0.0) {
            return Err(Error::InvalidInput(format!(
                "radial lower bound {r_min} must be positive (the pole is excluded)"
            )));
        }
        Ok(())
    }
}

/// Uniform tensor grid on a chart box. Axis 0 varies fastest in the node numbering.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    chart: PolarChart,
    bounds: ChartBox,
    dims: Vec<usize>,
    h: Vec<f64>,
    strides: Vec<usize>,
    len: usize,
}

/// Minimum number of nodes per axis.
pub const MIN_NODES: usize = 5;

impl Grid {
    pub fn new(chart: PolarChart, bounds: ChartBox, dims: Vec<usize>) -> Result<Self> {
        let n = chart.dim();
        if n > 3 {
            return Err(Error::InvalidInput(format!(
                "grids are limited to n <= 3, got n = {n}"
            )));
        }
        bounds.validate(&chart)?;
        if dims.len() != n {
            return Err(Error::InvalidInput(format!("need {n} node counts")));
        }
        if let Some(d) = dims.iter().find(|&&d| d < MIN_NODES) {
            return Err(Error::InvalidInput(format!(
                "{d} nodes on an axis; at least {MIN_NODES} required"
            )));
        }
        let h = (0..n)
            .map(|a| (bounds.hi[a] - bounds.lo[a]) / (dims[a] - 1) as f64)
            .collect();
        let mut strides = vec![1; n];
        for a in 1..n {
            strides[a] = strides[a - 1] * dims[a - 1];
        }
        let len = dims.iter().product();
        Ok(Grid {
            chart,
            bounds,
            dims,
            h,
            strides,
            len,
        })
    }

    pub fn uniform(chart: PolarChart, bounds: ChartBox, nodes: usize) -> Result<Self> {
        let n = chart.dim();
        Self::new(chart, bounds, vec![nodes; n])
    }

    /// The grid with every spacing halved.
    pub fn refined(&self) -> Self {
        let dims = self.dims.iter().map(|d| 2 * d - 1).collect();
        Self::new(self.chart, self.bounds.clone(), dims).expect("refinement of a valid grid")
    }

    pub fn chart(&self) -> &PolarChart {
        &self.chart
    }

    pub fn bounds(&self) -> &ChartBox {
        &self.bounds
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn spacing(&self) -> &[f64] {
        &self.h
    }

    /// Largest spacing, the refinement parameter `h`.
    pub fn h_max(&self) -> f64 {
        self.h.iter().cloned().fold(0.0, f64::max)
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    pub fn multi_index(&self, node: usize) -> Vec<usize> {
        (0..self.dim())
            .map(|a| (node / self.strides[a]) % self.dims[a])
            .collect()
    }

    pub fn node_at(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn coords(&self, node: usize) -> Vec<f64> {
        self.multi_index(node)
            .iter()
            .enumerate()
            .map(|(a, &i)| {
                if i == self.dims[a] - 1 {
                    self.bounds.hi[a]
                } else {
                    self.bounds.lo[a] + i as f64 * self.h[a]
                }
            })
            .collect()
    }

    /// Index distance to the nearest face; 0 on the boundary.
    pub fn boundary_distance(&self, node: usize) -> usize {
        self.multi_index(node)
            .iter()
            .zip(&self.dims)
            .map(|(&i, &d)| i.min(d - 1 - i))
            .min()
            .unwrap()
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.boundary_distance(node) == 0
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.len).filter(|&p| !self.is_boundary(p)).collect()
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.len).filter(|&p| self.is_boundary(p)).collect()
    }
}

/// Per-node metric and Christoffel symbols, cached once per grid.
#[derive(Debug, Clone)]
pub struct GridGeometry {
    pub grid: Grid,
    coords: Vec<f64>,
    metric: Vec<f64>,
    gamma: Vec<f64>,
}

impl GridGeometry {
    pub fn new(grid: &Grid) -> Self {
        let n = grid.dim();
        let chart = *grid.chart();
        let mut coords = Vec::with_capacity(grid.len() * n);
        let mut metric = Vec::with_capacity(grid.len() * n);
        let mut gamma = Vec::with_capacity(grid.len() * n * n * n);
        for p in 0..grid.len() {
            let xi = grid.coords(p);
            metric.extend(chart.metric_at(&xi).diag);
            let c: Christoffel = chart.christoffel(&xi);
            gamma.extend_from_slice(c.as_slice());
            coords.extend(xi);
        }
        GridGeometry {
            grid: grid.clone(),
            coords,
            metric,
            gamma,
        }
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    #[inline]
    pub fn coords(&self, node: usize) -> &[f64] {
        let n = self.dim();
        &self.coords[node * n..(node + 1) * n]
    }

    /// `sigma_aa` at a node.
    #[inline]
    pub fn metric(&self, node: usize) -> &[f64] {
        let n = self.dim();
        &self.metric[node * n..(node + 1) * n]
    }

    /// `Gamma^m_ab` at a node.
    #[inline]
    pub fn gamma(&self, node: usize, m: usize, a: usize, b: usize) -> f64 {
        let n = self.dim();
        self.gamma[node * n * n * n + (m * n + a) * n + b]
    }

    /// Geodesic distance to the pole, which is the radial coordinate.
    #[inline]
    pub fn rho(&self, node: usize) -> f64 {
        self.coords(node)[self.dim() - 1]
    }
}
