//! Discrete covariant calculus on chart grids and the operator
//! `F(U[u]) - f^(1/(k-l))` with its exact discrete Jacobian.

mod grid;
mod source;

pub use grid::{ChartBox, Grid, GridGeometry, MIN_NODES};
pub use source::{NodalSource, Profile, RhsSpec, Source, SourceValue};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::SymMat;
use crate::sparse::CsrMatrix;
use crate::symfunc::{in_gamma_k, sigma_all, OperatorAt, QuotientSpec};

/// One value per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Grid) -> Self {
        ScalarField {
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        ScalarField {
            values: (0..grid.len()).map(|p| f(&grid.coords(p))).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl std::ops::Index<usize> for ScalarField {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// Coordinate partial derivatives `d_a u`, centered in the interior and
/// one-sided second order on the faces.
pub fn coord_gradient(geom: &GridGeometry, u: &[f64], node: usize) -> Vec<f64> {
    let grid = &geom.grid;
    let idx = grid.multi_index(node);
    (0..grid.dim())
        .map(|a| {
            let s = grid.stride(a);
            let h = grid.spacing()[a];
            let last = grid.dims()[a] - 1;
            if idx[a] == 0 {
                (-3.0 * u[node] + 4.0 * u[node + s] - u[node + 2 * s]) / (2.0 * h)
            } else if idx[a] == last {
                (3.0 * u[node] - 4.0 * u[node - s] + u[node - 2 * s]) / (2.0 * h)
            } else {
                (u[node + s] - u[node - s]) / (2.0 * h)
            }
        })
        .collect()
}

/// Gradient in the orthonormal frame, `(d_a u) / sqrt(sigma_aa)`.
pub fn covariant_gradient(geom: &GridGeometry, u: &[f64], node: usize) -> Vec<f64> {
    let g = geom.metric(node);
    coord_gradient(geom, u, node)
        .iter()
        .zip(g)
        .map(|(d, s)| d / s.sqrt())
        .collect()
}

/// `|grad u|_g^2`.
pub fn grad_norm_sq(geom: &GridGeometry, u: &[f64], node: usize) -> f64 {
    coord_gradient(geom, u, node)
        .iter()
        .zip(geom.metric(node))
        .map(|(d, s)| d * d / s)
        .sum()
}

/// Coordinate covariant Hessian `D_ab u - Gamma^m_ab D_m u` at an interior node.
pub fn coord_hessian(geom: &GridGeometry, u: &[f64], node: usize) -> Result<SymMat> {
    let grid = &geom.grid;
    if grid.boundary_distance(node) == 0 {
        return Err(Error::InvalidInput(format!(
            "node {node} is on the boundary; the Hessian stencil is clipped"
        )));
    }
    let n = grid.dim();
    let h = grid.spacing();
    let du = coord_gradient(geom, u, node);
    Ok(SymMat::from_fn(n, |a, b| {
        let (sa, sb) = (grid.stride(a), grid.stride(b));
        let second = if a == b {
            (u[node + sa] - 2.0 * u[node] + u[node - sa]) / (h[a] * h[a])
        } else {
            (u[node + sa + sb] - u[node + sa - sb] - u[node - sa + sb] + u[node - sa - sb])
                / (4.0 * h[a] * h[b])
        };
        let christ: f64 = (0..n).map(|m| geom.gamma(node, m, a, b) * du[m]).sum();
        second - christ
    }))
}

/// Frame Hessian `H_ab = (D_ab u - Gamma^m_ab D_m u) / sqrt(sigma_aa sigma_bb)`.
pub fn covariant_hessian(geom: &GridGeometry, u: &[f64], node: usize) -> Result<SymMat> {
    let k = coord_hessian(geom, u, node)?;
    let g = geom.metric(node);
    Ok(SymMat::from_fn(k.dim(), |a, b| {
        k.get(a, b) / (g[a] * g[b]).sqrt()
    }))
}

/// `U = tau tr(H) I - H`.
pub fn u_tensor(h: &SymMat, tau: f64) -> SymMat {
    let t = tau * h.trace();
    SymMat::from_fn(h.dim(), |i, j| if i == j { t - h.get(i, i) } else { -h.get(i, j) })
}

/// Relative cone margin `min_{j<=k} sigma_j / sigma_1^j`; negative or zero outside `Gamma_k`.
pub fn cone_margin(lambda: &[f64], k: usize) -> f64 {
    let s = sigma_all(lambda);
    if !(s[1] > 0.0) {
        let scale = lambda.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        return if scale > 0.0 { s[1] / scale } else { 0.0 };
    }
    (1..=k.min(lambda.len()))
        .map(|j| s[j] / s[1].powi(j as i32))
        .fold(f64::INFINITY, f64::min)
}

/// Everything the operator needs at one interior node.
#[derive(Debug, Clone)]
pub struct PointState {
    pub node: usize,
    pub u: f64,
    /// Frame gradient.
    pub grad: Vec<f64>,
    /// `|grad u|_g^2`.
    pub grad_sq: f64,
    /// Frame Hessian.
    pub hessian: SymMat,
    /// `U = tau tr(H) I - H`.
    pub umat: SymMat,
    /// Eigenvalues of `U`, ascending.
    pub lambda: Vec<f64>,
    pub admissible: bool,
    /// Present iff `admissible`.
    pub operator: Option<OperatorAt>,
}

impl PointState {
    pub fn f_value(&self) -> Option<f64> {
        self.operator.as_ref().map(|o| o.value)
    }

    pub fn f_grad(&self) -> Option<SymMat> {
        self.operator.as_ref().map(|o| o.grad())
    }

    pub fn t_coeffs(&self) -> Option<SymMat> {
        self.operator.as_ref().map(|o| o.decomp.compose(&o.frame_t()))
    }
}

pub fn assemble_point_state(
    geom: &GridGeometry,
    u: &[f64],
    node: usize,
    spec: &QuotientSpec,
) -> Result<PointState> {
    let hessian = covariant_hessian(geom, u, node)?;
    let umat = u_tensor(&hessian, spec.tau);
    let decomp = umat.eigen();
    let lambda = decomp.eigenvalues.clone();
    let admissible = in_gamma_k(&lambda, spec.k);
    let operator = if admissible {
        Some(OperatorAt::new(&umat, spec)?)
    } else {
        None
    };
    Ok(PointState {
        node,
        u: u[node],
        grad: covariant_gradient(geom, u, node),
        grad_sq: grad_norm_sq(geom, u, node),
        hessian,
        umat,
        lambda,
        admissible,
        operator,
    })
}

/// The discrete Dirichlet operator: unknowns are the interior nodes of the grid.
#[derive(Debug, Clone)]
pub struct HessOp {
    pub geom: GridGeometry,
    pub spec: QuotientSpec,
    interior: Vec<usize>,
    column: Vec<Option<usize>>,
}

impl HessOp {
    pub fn new(grid: &Grid, spec: QuotientSpec) -> Result<Self> {
        if grid.dim() != spec.n {
            return Err(Error::InvalidInput(format!(
                "grid dimension {} does not match n = {}",
                grid.dim(),
                spec.n
            )));
        }
        let geom = GridGeometry::new(grid);
        let interior = grid.interior_nodes();
        let mut column = vec![None; grid.len()];
        for (j, &p) in interior.iter().enumerate() {
            column[p] = Some(j);
        }
        Ok(HessOp {
            geom,
            spec,
            interior,
            column,
        })
    }

    /// The same discretization for the operator with another `tau`.
    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        let spec = QuotientSpec::new(self.spec.n, self.spec.k, self.spec.l, tau)?;
        Ok(HessOp {
            spec,
            ..self.clone()
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.geom.grid
    }

    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    /// Unknown index of a node, `None` on the boundary.
    pub fn column(&self, node: usize) -> Option<usize> {
        self.column[node]
    }

    pub fn point_state(&self, u: &[f64], node: usize) -> Result<PointState> {
        assemble_point_state(&self.geom, u, node, &self.spec)
    }

    /// Point states at all interior nodes, in interior order.
    pub fn states(&self, u: &[f64]) -> Result<Vec<PointState>> {
        self.interior
            .par_iter()
            .map(|&p| self.point_state(u, p))
            .collect()
    }

    /// Minimum relative cone margin over interior nodes.
    pub fn min_cone_margin(&self, u: &[f64]) -> f64 {
        let k = self.spec.k;
        let margins: Vec<f64> = self
            .interior
            .par_iter()
            .map(|&p| {
                let h = covariant_hessian(&self.geom, u, p).expect("interior node");
                cone_margin(&u_tensor(&h, self.spec.tau).eigen().eigenvalues, k)
            })
            .collect();
        margins.into_iter().fold(f64::INFINITY, f64::min)
    }

    /// `F(U[u]) - f^(1/(k-l))` at every interior node.
    pub fn residual<S: Source + ?Sized>(&self, u: &[f64], src: &S) -> Result<Vec<f64>> {
        let m = self.spec.order() as f64;
        self.interior
            .par_iter()
            .map(|&p| {
                let st = self.point_state(u, p)?;
                let op = st.operator.as_ref().ok_or_else(|| Error::NodeConeViolation {
                    node: p,
                    lambda: st.lambda.clone(),
                    k: self.spec.k,
                })?;
                let f = src.eval(p, self.geom.coords(p), u[p], st.grad_sq);
                Ok(op.value - f.value.powf(1.0 / m))
            })
            .collect()
    }

    /// Jacobian of [`HessOp::residual`] with respect to the interior values.
    pub fn linearize<S: Source + ?Sized>(&self, u: &[f64], src: &S) -> Result<CsrMatrix> {
        let m = self.spec.order() as f64;
        let n = self.spec.n;
        let rows: Vec<Result<Vec<(usize, f64)>>> = self
            .interior
            .par_iter()
            .map(|&p| {
                let st = self.point_state(u, p)?;
                let op = st.operator.as_ref().ok_or_else(|| Error::NodeConeViolation {
                    node: p,
                    lambda: st.lambda.clone(),
                    k: self.spec.k,
                })?;
                let t = op.decomp.compose(&op.frame_t());
                let g = self.geom.metric(p);
                let coeff = SymMat::from_fn(n, |a, b| t.get(a, b) / (g[a] * g[b]).sqrt());
                let f = src.eval(p, self.geom.coords(p), u[p], st.grad_sq);
                // d f^(1/m) = (1/m) f^(1/m - 1) df
                let chain = f.value.powf(1.0 / m - 1.0) / m;
                let du = coord_gradient(&self.geom, u, p);
                let first: Vec<f64> = (0..n)
                    .map(|c| {
                        let mut b = 0.0;
                        for a in 0..n {
                            for bb in 0..n {
                                b -= coeff.get(a, bb) * self.geom.gamma(p, c, a, bb);
                            }
                        }
                        b - chain * f.d_grad_sq * 2.0 * du[c] / g[c]
                    })
                    .collect();
                let zeroth = -chain * f.d_u;
                Ok(self.stencil_row(p, &coeff, &first, zeroth))
            })
            .collect();
        let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(CsrMatrix::from_rows(self.interior.len(), rows))
    }

    /// The Laplace-Beltrami operator restricted to interior unknowns (zero Dirichlet data).
    pub fn laplacian(&self) -> CsrMatrix {
        let n = self.spec.n;
        let rows = self
            .interior
            .par_iter()
            .map(|&p| {
                let g = self.geom.metric(p);
                let coeff = SymMat::from_fn(n, |a, b| if a == b { 1.0 / g[a] } else { 0.0 });
                let first: Vec<f64> = (0..n)
                    .map(|c| -(0..n).map(|a| self.geom.gamma(p, c, a, a) / g[a]).sum::<f64>())
                    .collect();
                self.stencil_row(p, &coeff, &first, 0.0)
            })
            .collect();
        CsrMatrix::from_rows(self.interior.len(), rows)
    }

    /// Row of `sum_ab c^ab D_ab + sum_m b^m D_m + z` on interior columns,
    /// sorted by column with duplicates merged.
    fn stencil_row(&self, p: usize, c: &SymMat, b: &[f64], z: f64) -> Vec<(usize, f64)> {
        let grid = self.grid();
        let n = grid.dim();
        let h = grid.spacing();
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(1 + 2 * n + 2 * n * n);
        entries.push((p, z));
        for a in 0..n {
            let sa = grid.stride(a);
            let w = c.get(a, a) / (h[a] * h[a]);
            entries.push((p + sa, w + b[a] / (2.0 * h[a])));
            entries.push((p - sa, w - b[a] / (2.0 * h[a])));
            entries.push((p, -2.0 * w));
            for bb in (a + 1)..n {
                let sb = grid.stride(bb);
                let w = 2.0 * c.get(a, bb) / (4.0 * h[a] * h[bb]);
                entries.push((p + sa + sb, w));
                entries.push((p - sa - sb, w));
                entries.push((p + sa - sb, -w));
                entries.push((p - sa + sb, -w));
            }
        }
        let mut row: Vec<(usize, f64)> = entries
            .into_iter()
            .filter_map(|(node, v)| self.column[node].map(|j| (j, v)))
            .collect();
        row.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
        for (j, v) in row {
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += v,
                _ => merged.push((j, v)),
            }
        }
        merged
    }

    /// Writes interior unknowns into a full field whose boundary values are kept.
    pub fn scatter(&self, x: &[f64], field: &mut [f64]) {
        for (j, &p) in self.interior.iter().enumerate() {
            field[p] = x[j];
        }
    }

    pub fn gather(&self, field: &[f64]) -> Vec<f64> {
        self.interior.iter().map(|&p| field[p]).collect()
    }
}
