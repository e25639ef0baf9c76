use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use super::{check_positive, check_subset, OrthantDensity};
use crate::error::{Error, Result};
use crate::linalg::{self, centering_projection};
use crate::normal;

const SYM_TOL: f64 = 1e-12;
const CND_TOL: f64 = 1e-10;

/// Checks that `gamma` is a valid Hüsler–Reiss variogram: symmetric, zero
/// diagonal, nonnegative, and strictly conditionally negative definite.
pub fn validate_variogram(gamma: &DMatrix<f64>) -> Result<()> {
    let d = gamma.nrows();
    if d == 0 || gamma.ncols() != d {
        return Err(Error::validation("measures", "variogram must be a non-empty square matrix"));
    }
    if gamma.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("measures", "variogram has non-finite entries"));
    }
    let scale = gamma.amax().max(1.0);
    if linalg::max_asymmetry(gamma) > SYM_TOL * scale {
        return Err(Error::validation("measures", "variogram is not symmetric"));
    }
    if (0..d).any(|i| gamma[(i, i)].abs() > SYM_TOL * scale) {
        return Err(Error::validation("measures", "variogram diagonal must be zero"));
    }
    if gamma.iter().any(|&v| v < 0.0) {
        return Err(Error::validation("measures", "variogram entries must be >= 0"));
    }
    if d > 1 {
        // On 1⊥ the form P(−Γ/2)P must be positive definite; adding 11ᵀ/d fills
        // the remaining direction with eigenvalue 1.
        let p = centering_projection(d);
        let form = &p * (gamma * -0.5) * &p + DMatrix::from_element(d, d, 1.0 / d as f64);
        let lowest = linalg::min_eigenvalue(&form);
        if lowest <= CND_TOL * form.amax().max(1.0) {
            return Err(Error::validation(
                "measures",
                format!("variogram is not strictly conditionally negative definite (smallest eigenvalue on 1⊥: {lowest:e})"),
            ));
        }
    }
    Ok(())
}

/// Θ = (P(−Γ/2)P)⁺.
pub fn hr_gamma_to_theta(gamma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(HrParams::new(gamma.clone())?.theta)
}

/// Hüsler–Reiss standardized measure on the positive orthant.
///
/// The density is c·Π yᵢ^(−1−1/d)·exp{−½(log y − μ)ᵀΘ(log y − μ)} with
/// μ = P(−Γ/2)1/d. That choice of μ (equivalently μ = −½·P·diag(P(−Γ/2)P))
/// makes every margin standardized, Λ*(yᵢ > x) = 1/x, and then
/// log c = −tr(P(−Γ/2)P)/(2d) + ½ log pdet Θ − ½ log d − (d−1)/2 · log 2π.
#[derive(Debug, Clone)]
pub struct HrParams {
    gamma: DMatrix<f64>,
    theta: DMatrix<f64>,
    mu: DVector<f64>,
    log_norm: f64,
}

impl HrParams {
    pub fn new(gamma: DMatrix<f64>) -> Result<Self> {
        validate_variogram(&gamma)?;
        let d = gamma.nrows();
        let gamma = 0.5 * (&gamma + gamma.transpose());
        let p = centering_projection(d);
        let half = &gamma * -0.5;
        let sigma_p = &p * &half * &p;
        let pinv = linalg::pseudo_inverse_sym(&sigma_p);
        let theta = 0.5 * (&pinv.inverse + pinv.inverse.transpose());
        let mu = (&p * &half * DVector::from_element(d, 1.0)) / d as f64;
        let df = d as f64;
        let log_norm = -sigma_p.trace() / (2.0 * df) - 0.5 * pinv.log_pdet
            - 0.5 * df.ln()
            - 0.5 * (df - 1.0) * (2.0 * PI).ln();
        Ok(Self {
            gamma,
            theta,
            mu,
            log_norm,
        })
    }

    /// Builds from the edge values of a tree via tree-metric completion.
    pub fn from_tree(tree: &crate::tree::TreeTopology, edge_gammas: &crate::tree::EdgeMap<f64>) -> Result<Self> {
        Self::new(crate::tree::tree_metric_complete(tree, edge_gammas)?)
    }

    pub fn dim(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn theta(&self) -> &DMatrix<f64> {
        &self.theta
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn log_normalizing_constant(&self) -> f64 {
        self.log_norm
    }

    pub fn log_density(&self, y: &[f64]) -> Result<f64> {
        let d = self.dim();
        if y.len() != d {
            return Err(Error::validation("measures", format!("expected {d} coordinates, got {}", y.len())));
        }
        check_positive("measures", y)?;
        let logs = DVector::from_iterator(d, y.iter().map(|v| v.ln()));
        let centred = &logs - &self.mu;
        let quad = centred.dot(&(&self.theta * &centred));
        Ok(self.log_norm - (1.0 + 1.0 / d as f64) * logs.sum() - 0.5 * quad)
    }

    pub fn density(&self, y: &[f64]) -> Result<f64> {
        self.log_density(y).map(f64::exp)
    }

    /// Marginal on a sorted coordinate subset: Hüsler–Reiss with the sub-variogram.
    pub fn marginal(&self, subset: &[usize]) -> Result<HrParams> {
        let k = subset.len();
        let sub = DMatrix::from_fn(k, k, |a, b| self.gamma[(subset[a], subset[b])]);
        HrParams::new(sub)
    }

    /// Mean and covariance of log W for the extremal function anchored at
    /// coordinate `j` (W_j = 1), over the remaining coordinates in order.
    pub fn extremal_gaussian(&self, j: usize) -> (Vec<usize>, DVector<f64>, DMatrix<f64>) {
        let others: Vec<usize> = (0..self.dim()).filter(|&i| i != j).collect();
        let k = others.len();
        let g = &self.gamma;
        let mean = DVector::from_iterator(k, others.iter().map(|&i| -0.5 * g[(i, j)]));
        let cov = DMatrix::from_fn(k, k, |a, b| {
            let (i, l) = (others[a], others[b]);
            0.5 * (g[(i, j)] + g[(l, j)] - g[(i, l)])
        });
        (others, mean, cov)
    }

    /// V(x) = Λ*₊(y ∈ (0,∞)^d : yᵢ > xᵢ for some i), closed form for d ≤ 3.
    pub fn exponent_measure(&self, x: &[f64]) -> Result<f64> {
        let d = self.dim();
        if x.len() != d {
            return Err(Error::validation("measures", "point dimension mismatch"));
        }
        check_positive("measures", x)?;
        if d > 3 {
            return Err(Error::numerical(
                "measures",
                format!("closed-form exponent measure is implemented for d <= 3, got d = {d}"),
            ));
        }
        let mut total = 0.0;
        for j in 0..d {
            let (others, mean, cov) = self.extremal_gaussian(j);
            let z: Vec<f64> = others
                .iter()
                .enumerate()
                .map(|(a, &k)| ((x[k] / x[j]).ln() - mean[a]) / cov[(a, a)].sqrt())
                .collect();
            let prob = match z.len() {
                0 => 1.0,
                1 => normal::cdf(z[0]),
                _ => {
                    let rho = cov[(0, 1)] / (cov[(0, 0)] * cov[(1, 1)]).sqrt();
                    normal::bivariate_cdf(z[0], z[1], rho)
                }
            };
            total += prob / x[j];
        }
        Ok(total)
    }
}

impl OrthantDensity for HrParams {
    fn dim(&self) -> usize {
        HrParams::dim(self)
    }

    fn density(&self, y: &[f64]) -> Result<f64> {
        HrParams::density(self, y)
    }

    fn marginal_density(&self, subset: &[usize], y: &[f64]) -> Result<f64> {
        check_subset(self.dim(), subset, y)?;
        if subset.len() == self.dim() {
            return HrParams::density(self, y);
        }
        self.marginal(subset)?.density(y)
    }
}

/// Hüsler–Reiss density at a strictly positive point.
pub fn hr_density(params: &HrParams, y: &[f64]) -> Result<f64> {
    params.density(y)
}

/// Bivariate positive-orthant tail Λ*₊(y₁ > x₁, y₂ > x₂) for variogram value
/// `gamma`, written as x₁⁻¹(1 − Φ(a₁)) + x₂⁻¹(1 − Φ(a₂)) with
/// aₖ = √Γ/2 + log(x_other/xₖ)/√Γ to avoid cancellation.
pub fn hr_bivariate_tail(gamma: f64, x1: f64, x2: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::domain("measures", format!("gamma must be positive, got {gamma}")));
    }
    check_positive("measures", &[x1, x2])?;
    let s = gamma.sqrt();
    let a1 = 0.5 * s + (x2 / x1).ln() / s;
    let a2 = 0.5 * s + (x1 / x2).ln() / s;
    Ok(normal::sf(a1) / x1 + normal::sf(a2) / x2)
}

/// 2 − 2Φ(√Γ/2).
pub fn hr_chi(gamma: f64) -> f64 {
    2.0 * normal::sf(0.5 * gamma.sqrt())
}
