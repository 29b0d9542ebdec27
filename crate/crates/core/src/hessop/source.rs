use crate::error::{Error, Result};

/// Value of a right-hand side `f(x, u, |grad u|^2)` and its partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceValue {
    pub value: f64,
    pub d_u: f64,
    /// Derivative with respect to `|grad u|_g^2`.
    pub d_grad_sq: f64,
}

/// A positive right-hand side evaluated node by node.
pub trait Source: Sync {
    fn eval(&self, node: usize, xi: &[f64], u: f64, grad_sq: f64) -> SourceValue;
}

/// Spatial profile `g(x)` of the closed-form right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Constant,
    /// `exp(-((rho - center) / width)^2)`.
    RadialGaussian { center: f64, width: f64 },
    /// `1 + strength * prod_a cos(wavenumber * xi^a)`, `0 <= strength < 1`.
    CosineProduct { strength: f64, wavenumber: f64 },
}

impl Profile {
    pub fn name(&self) -> &'static str {
        match self {
            Profile::Constant => "constant",
            Profile::RadialGaussian { .. } => "radial_gaussian",
            Profile::CosineProduct { .. } => "cosine_product",
        }
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        match *self {
            Profile::Constant => 1.0,
            Profile::RadialGaussian { center, width } => {
                let rho = xi[xi.len() - 1];
                (-((rho - center) / width).powi(2)).exp()
            }
            Profile::CosineProduct {
                strength,
                wavenumber,
            } => 1.0 + strength * xi.iter().map(|x| (wavenumber * x).cos()).product::<f64>(),
        }
    }
}

/// `f(x, u, p) = amplitude * g(x) * exp(-mu u) * (1 + |p|_g^2)^s`.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsSpec {
    pub amplitude: f64,
    pub profile: Profile,
    pub mu: f64,
    pub s: f64,
}

impl RhsSpec {
    pub fn constant(amplitude: f64) -> Self {
        RhsSpec {
            amplitude,
            profile: Profile::Constant,
            mu: 0.0,
            s: 0.0,
        }
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        RhsSpec {
            amplitude,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude > 0.0) || !self.amplitude.is_finite() {
            return Err(Error::InvalidInput(format!(
                "rhs amplitude {} must be positive",
                self.amplitude
            )));
        }
        if !self.mu.is_finite() || !self.s.is_finite() {
            return Err(Error::InvalidInput("rhs mu and s must be finite".into()));
        }
        match self.profile {
            Profile::Constant => {}
            Profile::RadialGaussian { width, center } => {
                if !(width > 0.0) || !center.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "radial gaussian width {width} must be positive"
                    )));
                }
            }
            Profile::CosineProduct {
                strength,
                wavenumber,
            } => {
                if !(0.0..1.0).contains(&strength) || !wavenumber.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "cosine product strength {strength} must lie in [0, 1)"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl Source for RhsSpec {
    fn eval(&self, _node: usize, xi: &[f64], u: f64, grad_sq: f64) -> SourceValue {
        let base = 1.0 + grad_sq;
        let value = self.amplitude * self.profile.eval(xi) * (-self.mu * u).exp() * base.powf(self.s);
        SourceValue {
            value,
            d_u: -self.mu * value,
            d_grad_sq: self.s * value / base,
        }
    }
}

/// Tabulated right-hand side `f(x)` with one value per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalSource(pub Vec<f64>);

impl Source for NodalSource {
    fn eval(&self, node: usize, _xi: &[f64], _u: f64, _grad_sq: f64) -> SourceValue {
        SourceValue {
            value: self.0[node],
            d_u: 0.0,
            d_grad_sq: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_derivatives() {
        let f = RhsSpec {
            amplitude: 2.0,
            profile: Profile::RadialGaussian {
                center: 1.0,
                width: 0.5,
            },
            mu: 0.7,
            s: 0.5,
        };
        let xi = [0.1, 1.2];
        let (u, g) = (-0.3, 0.4);
        let v = f.eval(0, &xi, u, g);
        let e = 1e-6;
        let du = (f.eval(0, &xi, u + e, g).value - f.eval(0, &xi, u - e, g).value) / (2.0 * e);
        let dg = (f.eval(0, &xi, u, g + e).value - f.eval(0, &xi, u, g - e).value) / (2.0 * e);
        assert!((v.d_u - du).abs() < 1e-8);
        assert!((v.d_grad_sq - dg).abs() < 1e-8);
    }

    #[test]
    fn validation() {
        assert!(RhsSpec::constant(0.0).validate().is_err());
        let mut f = RhsSpec::constant(1.0);
        f.profile = Profile::CosineProduct {
            strength: 1.0,
            wavenumber: 2.0,
        };
        assert!(f.validate().is_err());
        assert!(RhsSpec::constant(3.0).validate().is_ok());
    }
}
