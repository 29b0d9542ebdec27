//! Elementary symmetric functions and the quotient operator
//! `F(U) = (sigma_k(lambda(U)) / sigma_l(lambda(U)))^(1/(k-l))`.
//!
//! `sigma_k` uses the convention `sigma_0 = 1` and `sigma_k = 0` for `k < 0` or `k > n`.
//! Derivatives of `F` with respect to the matrix entries are assembled in the
//! eigenframe of `U` from derivatives of the eigenvalue function, then rotated back.

use std::ops::Deref;

use crate::error::{Error, Result};
use crate::linalg::{SpectralDecomp, SymMat, MAX_DIM};

/// Eigenvalue vector with `2 <= n <= 8` finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Lambda(Vec<f64>);

impl Lambda {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 || values.len() > MAX_DIM {
            return Err(Error::InvalidInput(format!(
                "eigenvalue vector length {} outside 2..={MAX_DIM}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite eigenvalue {v}")));
        }
        Ok(Lambda(values))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Lambda {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// The operator parameters `(n, k, l, tau)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuotientSpec {
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub tau: f64,
}

impl QuotientSpec {
    /// Validates the operator regime `0 <= l <= k-1 <= n-1` and `tau >= 1`.
    pub fn new(n: usize, k: usize, l: usize, tau: f64) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&n) {
            return Err(Error::InvalidInput(format!("n = {n} outside 2..={MAX_DIM}")));
        }
        if k == 0 || k > n || l >= k {
            return Err(Error::InvalidInput(format!(
                "need 0 <= l < k <= n, got n = {n}, k = {k}, l = {l}"
            )));
        }
        if !(tau >= 1.0) || !tau.is_finite() {
            return Err(Error::InvalidInput(format!("tau = {tau} must be a finite value >= 1")));
        }
        Ok(QuotientSpec { n, k, l, tau })
    }

    /// `k >= l + 2`, the regime in which the interior estimate is claimed.
    pub fn theorem_regime(&self) -> bool {
        self.k >= self.l + 2
    }

    /// The root order `k - l`.
    pub fn order(&self) -> usize {
        self.k - self.l
    }
}

/// Binomial coefficient as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `sigma_k` of the entries not listed in `skip`, by the coefficient recurrence
/// of `prod (1 + lambda_i t)`, truncated at degree `k`.
fn sigma_skipping(lambda: &[f64], k: i32, skip: &[usize]) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let k = k as usize;
    if k == 0 {
        return 1.0;
    }
    if k > lambda.len() - skip.len() {
        return 0.0;
    }
    let mut e = [0.0f64; MAX_DIM + 1];
    let mut e_vec;
    let e: &mut [f64] = if k < e.len() {
        &mut e[..=k]
    } else {
        e_vec = vec![0.0; k + 1];
        &mut e_vec
    };
    e[0] = 1.0;
    let mut seen = 0usize;
    for (i, &x) in lambda.iter().enumerate() {
        if skip.contains(&i) {
            continue;
        }
        seen += 1;
        for j in (1..=seen.min(k)).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e[k]
}

/// The `k`-th elementary symmetric function.
pub fn sigma(lambda: &[f64], k: i32) -> f64 {
    sigma_skipping(lambda, k, &[])
}

/// All of `sigma_0 ..= sigma_n` in one pass.
pub fn sigma_all(lambda: &[f64]) -> Vec<f64> {
    let n = lambda.len();
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for (i, &x) in lambda.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e
}

/// `sigma_{k-1}(lambda | i) = d sigma_k / d lambda_i`: `sigma_{k-1}` with entry `i` removed.
pub fn sigma_partial(lambda: &[f64], k: i32, i: usize) -> Result<f64> {
    if i >= lambda.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            n: lambda.len(),
        });
    }
    Ok(sigma_skipping(lambda, k - 1, &[i]))
}

/// `sigma_{k-2}(lambda | ij)` for `i != j`.
fn sigma_partial2(lambda: &[f64], k: i32, i: usize, j: usize) -> f64 {
    debug_assert!(i != j);
    sigma_skipping(lambda, k - 2, &[i, j])
}

/// Strict membership in the Garding cone: `sigma_j(lambda) > 0` for `1 <= j <= k`.
pub fn in_gamma_k(lambda: &[f64], k: usize) -> bool {
    let s = sigma_all(lambda);
    (1..=k.min(lambda.len())).all(|j| s[j] > 0.0) && k <= lambda.len()
}

fn require_cone(lambda: &[f64], k: usize) -> Result<()> {
    if in_gamma_k(lambda, k) {
        Ok(())
    } else {
        Err(Error::ConeViolation {
            lambda: lambda.to_vec(),
            k,
        })
    }
}

/// The eigenvalue function `phi(lambda) = (sigma_k / sigma_l)^(1/(k-l))` and its
/// first and second partial derivatives.
#[derive(Debug, Clone)]
pub struct QuotientDerivs {
    pub value: f64,
    /// `d phi / d lambda_i`.
    pub grad: Vec<f64>,
    /// Row-major `d^2 phi / d lambda_i d lambda_j`.
    pub hess: Vec<f64>,
}

/// Value and gradient of `phi` at `lambda`.
pub fn quotient_value_grad(lambda: &[f64], spec: &QuotientSpec) -> Result<(f64, Vec<f64>)> {
    check_dim(lambda, spec)?;
    require_cone(lambda, spec.k)?;
    let (k, l) = (spec.k as i32, spec.l as i32);
    let m = spec.order() as f64;
    let sk = sigma(lambda, k);
    let sl = sigma(lambda, l);
    let q = sk / sl;
    let value = q.powf(1.0 / m);
    let pref = value / (m * q);
    let grad = (0..lambda.len())
        .map(|i| {
            let gi = sigma_skipping(lambda, k - 1, &[i]);
            let di = sigma_skipping(lambda, l - 1, &[i]);
            pref * (gi * sl - sk * di) / (sl * sl)
        })
        .collect();
    Ok((value, grad))
}

/// Value, gradient and Hessian of `phi` at `lambda`.
pub fn quotient_derivs(lambda: &[f64], spec: &QuotientSpec) -> Result<QuotientDerivs> {
    check_dim(lambda, spec)?;
    require_cone(lambda, spec.k)?;
    let n = lambda.len();
    let (k, l) = (spec.k as i32, spec.l as i32);
    let m = spec.order() as f64;
    let sk = sigma(lambda, k);
    let sl = sigma(lambda, l);
    let q = sk / sl;
    let g: Vec<f64> = (0..n).map(|i| sigma_skipping(lambda, k - 1, &[i])).collect();
    let d: Vec<f64> = (0..n).map(|i| sigma_skipping(lambda, l - 1, &[i])).collect();
    let qi: Vec<f64> = (0..n).map(|i| (g[i] * sl - sk * d[i]) / (sl * sl)).collect();

    let value = q.powf(1.0 / m);
    let p1 = value / (m * q);
    let p2 = (1.0 / m) * (1.0 / m - 1.0) * value / (q * q);
    let grad: Vec<f64> = qi.iter().map(|x| p1 * x).collect();
    let mut hess = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let (gij, dij) = if i == j {
                (0.0, 0.0)
            } else {
                (sigma_partial2(lambda, k, i, j), sigma_partial2(lambda, l, i, j))
            };
            let qij = gij / sl - (g[i] * d[j] + g[j] * d[i]) / (sl * sl) - sk * dij / (sl * sl)
                + 2.0 * sk * d[i] * d[j] / (sl * sl * sl);
            hess[i * n + j] = p2 * qi[i] * qi[j] + p1 * qij;
        }
    }
    Ok(QuotientDerivs { value, grad, hess })
}

fn check_dim(lambda: &[f64], spec: &QuotientSpec) -> Result<()> {
    if lambda.len() != spec.n {
        return Err(Error::InvalidInput(format!(
            "eigenvalue vector has length {}, operator expects n = {}",
            lambda.len(),
            spec.n
        )));
    }
    Ok(())
}

/// The quotient operator evaluated at one matrix: eigen-decomposition plus the
/// first derivatives of `phi`, shared by the value, gradient and `T` coefficients.
#[derive(Debug, Clone)]
pub struct OperatorAt {
    pub spec: QuotientSpec,
    pub decomp: SpectralDecomp,
    pub value: f64,
    /// `F^{ii}` in the eigenframe, aligned with `decomp.eigenvalues`.
    pub frame_grad: Vec<f64>,
}

impl OperatorAt {
    pub fn new(u: &SymMat, spec: &QuotientSpec) -> Result<Self> {
        if u.dim() != spec.n {
            return Err(Error::InvalidInput(format!(
                "matrix dimension {} does not match n = {}",
                u.dim(),
                spec.n
            )));
        }
        let decomp = u.eigen();
        let (value, frame_grad) = quotient_value_grad(&decomp.eigenvalues, spec)?;
        Ok(OperatorAt {
            spec: *spec,
            decomp,
            value,
            frame_grad,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.decomp.eigenvalues
    }

    /// `F^{ij}`.
    pub fn grad(&self) -> SymMat {
        self.decomp.compose(&self.frame_grad)
    }

    /// `T^{ii}` in the eigenframe: `tau * sum_j F^{jj} - F^{ii}`.
    pub fn frame_t(&self) -> Vec<f64> {
        let tr: f64 = self.frame_grad.iter().sum();
        self.frame_grad
            .iter()
            .map(|f| self.spec.tau * tr - f)
            .collect()
    }

    /// `T^{ij} = tau * tr(F^{..}) * I - F^{ij}`.
    pub fn t_coeffs(&self) -> Result<SymMat> {
        let t = self.frame_t();
        if let Some(bad) = t.iter().find(|v| !(**v > 0.0)) {
            return Err(Error::InvalidInput(format!(
                "linearization coefficients not positive definite (eigenvalue {bad:e})"
            )));
        }
        Ok(self.decomp.compose(&t))
    }

    /// The second directional derivative `F^{ij,rs} V_ij V_rs`.
    pub fn hess_form(&self, v: &SymMat) -> Result<f64> {
        let n = self.spec.n;
        let lam = &self.decomp.eigenvalues;
        let d = quotient_derivs(lam, &self.spec)?;
        let vt = v.congruence_t(&self.decomp.vectors);
        let scale = 1.0 + lam.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += d.hess[i * n + j] * vt.get(i, i) * vt.get(j, j);
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let gap = lam[i] - lam[j];
                let divided = if gap.abs() <= 1e-9 * scale {
                    // confluent limit of (phi_i - phi_j) / (lambda_i - lambda_j)
                    d.hess[i * n + i] - d.hess[i * n + j]
                } else {
                    (d.grad[i] - d.grad[j]) / gap
                };
                s += divided * vt.get(i, j).powi(2);
            }
        }
        Ok(s)
    }
}

pub fn f_value(u: &SymMat, spec: &QuotientSpec) -> Result<f64> {
    Ok(OperatorAt::new(u, spec)?.value)
}

pub fn f_grad(u: &SymMat, spec: &QuotientSpec) -> Result<SymMat> {
    Ok(OperatorAt::new(u, spec)?.grad())
}

pub fn f_hess_form(u: &SymMat, v: &SymMat, spec: &QuotientSpec) -> Result<f64> {
    OperatorAt::new(u, spec)?.hess_form(v)
}

pub fn t_coeffs(u: &SymMat, spec: &QuotientSpec) -> Result<SymMat> {
    OperatorAt::new(u, spec)?.t_coeffs()
}

/// `-F^{1i,i1}` style coefficient: minus half the second derivative along `e_i (x) e_j + e_j (x) e_i`.
pub fn offdiag_second_coefficient(
    u: &SymMat,
    spec: &QuotientSpec,
    i: usize,
    j: usize,
) -> Result<f64> {
    let n = spec.n;
    if i >= n || j >= n {
        return Err(Error::IndexOutOfRange { index: i.max(j), n });
    }
    let mut v = SymMat::zeros(n);
    v.set(i, j, 1.0);
    Ok(-0.5 * f_hess_form(u, &v, spec)?)
}

/// `sum_i F^{ii} - (C(n,k) / C(n,l))^(1/(k-l))`; nonnegative on the cone.
pub fn trace_lower_bound(u: &SymMat, spec: &QuotientSpec) -> Result<f64> {
    let op = OperatorAt::new(u, spec)?;
    let bound = (binomial(spec.n, spec.k) / binomial(spec.n, spec.l)).powf(1.0 / spec.order() as f64);
    Ok(op.frame_grad.iter().sum::<f64>() - bound)
}

/// For diagonal `U` with entries sorted descending: is the diagonal of `F^{ij}` ascending?
pub fn check_fl2(u: &SymMat, spec: &QuotientSpec) -> Result<bool> {
    let n = u.dim();
    for i in 0..n {
        for j in 0..i {
            if u.get(i, j) != 0.0 {
                return Err(Error::InvalidInput("matrix is not diagonal".into()));
            }
        }
    }
    let diag = u.diag();
    if diag.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidInput("diagonal is not sorted descending".into()));
    }
    let g = f_grad(u, spec)?.diag();
    let scale = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(g.windows(2).all(|w| w[0] <= w[1] + 1e-12 * scale.max(1.0)))
}

/// Residuals of the symmetric-function identities at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Prop1Report {
    /// `min_i sigma_{k-1}(lambda | i)`; positive inside the cone.
    pub min_partial: f64,
    /// `max_i |sigma_k - sigma_k(lambda|i) - lambda_i sigma_{k-1}(lambda|i)|`, relative.
    pub splitting_residual: f64,
    /// Largest relative descent of `sigma_{k-1}(lambda|i)` along the descending sort.
    pub monotonicity_violation: f64,
    /// `|sum_i sigma_{k-1}(lambda|i) - (n-k+1) sigma_{k-1}|`, relative.
    pub trace_residual: f64,
}

impl Prop1Report {
    pub fn max_residual(&self) -> f64 {
        self.splitting_residual
            .max(self.monotonicity_violation)
            .max(self.trace_residual)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.min_partial > 0.0 && self.max_residual() <= tol
    }
}

pub fn check_prop1(lambda: &[f64], k: usize) -> Prop1Report {
    let n = lambda.len();
    let ki = k as i32;
    let abs: Vec<f64> = lambda.iter().map(|x| x.abs()).collect();
    let scale_k = sigma(&abs, ki).max(f64::MIN_POSITIVE);
    let scale_km1 = sigma(&abs, ki - 1).max(f64::MIN_POSITIVE);

    let partials: Vec<f64> = (0..n).map(|i| sigma_skipping(lambda, ki - 1, &[i])).collect();
    let min_partial = partials.iter().cloned().fold(f64::INFINITY, f64::min);

    let sk = sigma(lambda, ki);
    let splitting_residual = (0..n)
        .map(|i| (sk - sigma_skipping(lambda, ki, &[i]) - lambda[i] * partials[i]).abs() / scale_k)
        .fold(0.0, f64::max);

    let mut sorted = lambda.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let sorted_partials: Vec<f64> = (0..n).map(|i| sigma_skipping(&sorted, ki - 1, &[i])).collect();
    let monotonicity_violation = sorted_partials
        .windows(2)
        .map(|w| (w[0] - w[1]).max(0.0) / scale_km1)
        .fold(0.0, f64::max);

    let trace_residual = (partials.iter().sum::<f64>() - (n - k + 1) as f64 * sigma(lambda, ki - 1))
        .abs()
        / (n as f64 * scale_km1);

    Prop1Report {
        min_partial,
        splitting_residual,
        monotonicity_violation,
        trace_residual,
    }
}

/// Signed slacks of the two Newton-Maclaurin inequalities (`rhs - lhs`) and their scales.
#[derive(Debug, Clone, PartialEq)]
pub struct MaclaurinReport {
    pub product_slack: f64,
    pub product_scale: f64,
    pub quotient_slack: f64,
    pub quotient_scale: f64,
}

impl MaclaurinReport {
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.product_slack >= -rel_tol * self.product_scale
            && self.quotient_slack >= -rel_tol * self.quotient_scale
    }
}

/// Evaluates
/// `k(n-l+1) sigma_{l-1} sigma_k <= l(n-k+1) sigma_l sigma_{k-1}` and the normalized
/// quotient chain `[S_k/S_l]^(1/(k-l)) <= [S_r/S_s]^(1/(r-s))`, `S_j = sigma_j / C(n,j)`.
pub fn check_maclaurin(
    lambda: &[f64],
    spec: &QuotientSpec,
    r: usize,
    s: usize,
) -> Result<MaclaurinReport> {
    check_dim(lambda, spec)?;
    let (n, k, l) = (spec.n, spec.k, spec.l);
    if !(s <= l && s < r && r <= k) {
        return Err(Error::InvalidInput(format!(
            "need s <= l, s < r <= k; got r = {r}, s = {s}, k = {k}, l = {l}"
        )));
    }
    require_cone(lambda, k)?;
    let sig = sigma_all(lambda);
    let sgm = |j: i64| -> f64 {
        if j < 0 || j as usize > n {
            0.0
        } else {
            sig[j as usize]
        }
    };
    let (ki, li) = (k as i64, l as i64);
    let lhs1 = k as f64 * (n - l + 1) as f64 * sgm(li - 1) * sgm(ki);
    let rhs1 = l as f64 * (n - k + 1) as f64 * sgm(li) * sgm(ki - 1);

    let norm = |j: usize| sig[j] / binomial(n, j);
    let lhs2 = (norm(k) / norm(l)).powf(1.0 / (k - l) as f64);
    let rhs2 = (norm(r) / norm(s)).powf(1.0 / (r - s) as f64);
    Ok(MaclaurinReport {
        product_slack: rhs1 - lhs1,
        product_scale: lhs1.abs().max(rhs1.abs()),
        quotient_slack: rhs2 - lhs2,
        quotient_scale: lhs2.abs().max(rhs2.abs()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, k: usize, l: usize) -> QuotientSpec {
        QuotientSpec::new(n, k, l, 1.0).unwrap()
    }

    // subset enumeration, kept local so these unit tests do not lean on `oracle`
    fn enumerate(lambda: &[f64], k: usize) -> f64 {
        let n = lambda.len();
        (0u32..1 << n)
            .filter(|m| m.count_ones() as usize == k)
            .map(|m| (0..n).filter(|i| m >> i & 1 == 1).map(|i| lambda[i]).product::<f64>())
            .sum()
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma(&[1.0, 1.0, 1.0], 2), 3.0);
        assert_eq!(sigma(&[1.0, 2.0, 3.0], 2), enumerate(&[1.0, 2.0, 3.0], 2));
        assert_eq!(sigma(&[1.0, 2.0, 3.0], 2), 11.0);
        assert_eq!(sigma(&[4.0, -2.0], 0), 1.0);
        assert_eq!(sigma(&[4.0, -2.0], 3), 0.0);
        assert_eq!(sigma(&[4.0, -2.0], -1), 0.0);
        assert_eq!(sigma_all(&[1.0, 2.0, 3.0]), vec![1.0, 6.0, 11.0, 6.0]);
    }

    #[test]
    fn sigma_partial_examples() {
        assert_eq!(sigma_partial(&[1.0, 2.0, 3.0], 2, 0).unwrap(), 5.0);
        assert_eq!(sigma_partial(&[1.0, 1.0, 1.0], 3, 1).unwrap(), 1.0);
        assert_eq!(sigma_partial(&[4.0, -1.0], 1, 0).unwrap(), 1.0);
        assert!(matches!(
            sigma_partial(&[4.0, -1.0], 1, 2),
            Err(Error::IndexOutOfRange { index: 2, n: 2 })
        ));
    }

    #[test]
    fn cone_membership() {
        assert!(in_gamma_k(&[1.0, 1.0, 1.0], 3));
        assert!(!in_gamma_k(&[2.0, 2.0, -1.0], 2));
        assert!(in_gamma_k(&[2.0, 2.0, -1.0], 1));
        assert!(!in_gamma_k(&[-1.0, -1.0], 1));
    }

    #[test]
    fn spec_validation() {
        assert!(QuotientSpec::new(3, 2, 0, 1.0).unwrap().theorem_regime());
        assert!(!QuotientSpec::new(3, 2, 1, 1.0).unwrap().theorem_regime());
        assert!(QuotientSpec::new(3, 2, 2, 1.0).is_err());
        assert!(QuotientSpec::new(3, 4, 0, 1.0).is_err());
        assert!(QuotientSpec::new(3, 2, 0, 0.5).is_err());
        assert!(QuotientSpec::new(9, 2, 0, 1.0).is_err());
    }

    #[test]
    fn lambda_validation() {
        assert!(Lambda::new(vec![1.0]).is_err());
        assert!(Lambda::new(vec![1.0, f64::NAN]).is_err());
        assert_eq!(&*Lambda::new(vec![1.0, 2.0]).unwrap(), &[1.0, 2.0]);
    }

    #[test]
    fn f_value_examples() {
        let i3 = SymMat::identity(3);
        assert!((f_value(&i3, &spec(3, 2, 0)).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        assert!((f_value(&i3, &spec(3, 3, 1)).unwrap() - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let d = SymMat::from_diag(&[1.0, 2.0, 3.0]);
        assert!((f_value(&d, &spec(3, 2, 0)).unwrap() - 11f64.sqrt()).abs() < 1e-14);
        let bad = SymMat::from_diag(&[2.0, 2.0, -1.0]);
        assert!(matches!(f_value(&bad, &spec(3, 2, 0)), Err(Error::ConeViolation { .. })));
    }

    #[test]
    fn f_grad_at_identity() {
        let g = f_grad(&SymMat::identity(3), &spec(3, 2, 0)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 / 3f64.sqrt() } else { 0.0 };
                assert!((g.get(i, j) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn f_grad_of_diagonal_is_diagonal() {
        let g = f_grad(&SymMat::from_diag(&[3.0, 0.5, 1.5]), &spec(3, 3, 1)).unwrap();
        assert_eq!(g.get(0, 1), 0.0);
        assert_eq!(g.get(0, 2), 0.0);
        assert_eq!(g.get(1, 2), 0.0);
    }

    #[test]
    fn t_coeffs_at_identity() {
        let s = spec(3, 2, 0);
        let t = t_coeffs(&SymMat::identity(3), &s).unwrap();
        let g = f_grad(&SymMat::identity(3), &s).unwrap();
        for i in 0..3 {
            assert!((t.get(i, i) - 2.0 / 3f64.sqrt()).abs() < 1e-15);
        }
        assert!((t.trace() - (3.0 - 1.0) * g.trace()).abs() < 1e-14);
    }

    #[test]
    fn hess_form_zero_direction() {
        let v = SymMat::zeros(3);
        assert_eq!(f_hess_form(&SymMat::identity(3), &v, &spec(3, 2, 0)).unwrap(), 0.0);
    }

    #[test]
    fn fl1_sign_convention_on_diagonal() {
        let s = spec(3, 3, 1);
        let u = SymMat::from_diag(&[4.0, 2.0, 1.0]);
        let g = f_grad(&u, &s).unwrap();
        let c = offdiag_second_coefficient(&u, &s, 0, 2).unwrap();
        let want = (g.get(0, 0) - g.get(2, 2)) / (u.get(2, 2) - u.get(0, 0));
        assert!((c - want).abs() <= 1e-12 * want.abs());
    }

    #[test]
    fn trace_bound_equality_at_identity() {
        let slack = trace_lower_bound(&SymMat::identity(3), &spec(3, 2, 0)).unwrap();
        assert!(slack.abs() < 1e-15);
        let slack = trace_lower_bound(&SymMat::from_diag(&[1.0, 1.0, 10.0]), &spec(3, 2, 0)).unwrap();
        assert!(slack > 0.0);
    }

    #[test]
    fn fl2_examples() {
        assert!(check_fl2(&SymMat::from_diag(&[3.0, 2.0, 1.0]), &spec(3, 2, 0)).unwrap());
        assert!(check_fl2(&SymMat::identity(3).scaled(2.5), &spec(3, 3, 1)).unwrap());
        assert!(check_fl2(&SymMat::from_diag(&[1.0, 2.0, 3.0]), &spec(3, 2, 0)).is_err());
    }

    #[test]
    fn prop1_examples() {
        let r = check_prop1(&[1.0, 2.0, 3.0], 2);
        assert_eq!(r.splitting_residual, 0.0);
        assert!(r.holds(1e-10));
        for n in 2..=6usize {
            for k in 1..=n {
                let ones = vec![1.0; n];
                let r = check_prop1(&ones, k);
                let sum: f64 = (0..n).map(|i| sigma_partial(&ones, k as i32, i).unwrap()).sum();
                assert!((sum - (n - k + 1) as f64 * binomial(n, k - 1)).abs() < 1e-12);
                assert!(r.trace_residual < 1e-15);
            }
        }
        let lam = [5.0, 1.0, 0.1];
        let p: Vec<f64> = (0..3).map(|i| sigma_partial(&lam, 2, i).unwrap()).collect();
        assert!(p[0] <= p[1] && p[1] <= p[2]);
    }

    #[test]
    fn maclaurin_examples() {
        let r = check_maclaurin(&[1.0; 4], &spec(4, 3, 1), 2, 0).unwrap();
        assert!(r.quotient_slack.abs() < 1e-15);
        assert!(r.holds(1e-12));
        let r = check_maclaurin(&[1.0, 2.0, 3.0], &spec(3, 2, 1), 2, 0).unwrap();
        assert!(r.quotient_slack >= 0.0);
        assert!(check_maclaurin(&[1.0, 2.0, 3.0], &spec(3, 2, 1), 3, 0).is_err());
    }

    #[test]
    fn homogeneity() {
        let s = spec(4, 4, 2);
        let u = SymMat::from_fn(4, |i, j| if i == j { 2.0 + i as f64 } else { 0.1 });
        let f1 = f_value(&u, &s).unwrap();
        let f2 = f_value(&u.scaled(3.7), &s).unwrap();
        assert!((f2 - 3.7 * f1).abs() <= 1e-12 * f2);
    }
}
