use super::{check_positive, check_subset, OrthantDensity};
use crate::error::{Error, Result};

/// Clayton standardized measure on the positive orthant with joint tail
/// Λ*(y ≥ x) = (x₁^θ + … + x_d^θ)^(−1/θ), θ ∈ (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClaytonParams {
    theta: f64,
}

impl ClaytonParams {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::validation(
                "measures",
                format!("Clayton theta must lie in (0, 1), got {theta}"),
            ));
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn tail(&self, x: &[f64]) -> Result<f64> {
        if x.is_empty() {
            return Err(Error::validation("measures", "empty point"));
        }
        check_positive("measures", x)?;
        let s: f64 = x.iter().map(|v| v.powf(self.theta)).sum();
        Ok(s.powf(-1.0 / self.theta))
    }

    /// Bivariate density (1 + θ)(x₁x₂)^(θ−1)(x₁^θ + x₂^θ)^(−1/θ−2).
    pub fn bivariate_density(&self, x1: f64, x2: f64) -> Result<f64> {
        check_positive("measures", &[x1, x2])?;
        let t = self.theta;
        let s = x1.powf(t) + x2.powf(t);
        Ok((1.0 + t) * (x1 * x2).powf(t - 1.0) * s.powf(-1.0 / t - 2.0))
    }

    /// Λ*(|y₁| > 1, |y₂| > 1)/2 for the symmetric model, i.e. the tail at (1, 1): 2^(−1/θ).
    pub fn tail_chi(&self) -> f64 {
        2f64.powf(-1.0 / self.theta)
    }
}

/// Bivariate Clayton as an orthant density (used on tree edges).
impl OrthantDensity for ClaytonParams {
    fn dim(&self) -> usize {
        2
    }

    fn density(&self, y: &[f64]) -> Result<f64> {
        if y.len() != 2 {
            return Err(Error::validation("measures", "Clayton density is bivariate"));
        }
        self.bivariate_density(y[0], y[1])
    }

    fn marginal_density(&self, subset: &[usize], y: &[f64]) -> Result<f64> {
        check_subset(2, subset, y)?;
        check_positive("measures", y)?;
        match subset.len() {
            1 => Ok(1.0 / (y[0] * y[0])),
            _ => self.bivariate_density(y[0], y[1]),
        }
    }
}

pub fn clayton_tail(params: &ClaytonParams, x: &[f64]) -> Result<f64> {
    params.tail(x)
}
