//! Standardized Lévy measures: Hüsler–Reiss and Clayton families, marginal
//! stable tails, orthant asymmetry weights and closed-form Lévy correlations.

mod clayton;
mod hr;
mod marginal;
mod orthant;

use crate::error::{Error, Result};
use crate::quadrature;

pub use clayton::{clayton_tail, ClaytonParams};
pub use hr::{hr_bivariate_tail, hr_chi, hr_density, hr_gamma_to_theta, validate_variogram, HrParams};
pub use marginal::{std_to_original, MarginCoord, MarginalSpec};
pub use orthant::{all_sign_vectors, orthant_weight, OrthantWeights, Sign};

/// Density of a standardized, −1-homogeneous measure on the open positive
/// orthant, together with its lower-dimensional marginals.
pub trait OrthantDensity: Sync {
    fn dim(&self) -> usize;

    /// Density at a strictly positive point.
    fn density(&self, y: &[f64]) -> Result<f64>;

    /// Density of the marginal on the sorted coordinate set `subset`,
    /// evaluated at the strictly positive point `y` (one entry per coordinate
    /// of `subset`). The default integrates the remaining coordinates out
    /// numerically and supports at most two of them.
    fn marginal_density(&self, subset: &[usize], y: &[f64]) -> Result<f64> {
        quadrature_marginal(self, subset, y)
    }
}

pub(crate) fn check_positive(module: &'static str, y: &[f64]) -> Result<()> {
    if let Some((i, v)) = y.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::domain(
            module,
            format!("coordinate {} must be positive and finite, got {v}", i + 1),
        ));
    }
    Ok(())
}

pub(crate) fn check_subset(d: usize, subset: &[usize], y: &[f64]) -> Result<()> {
    if subset.is_empty() || subset.len() != y.len() {
        return Err(Error::validation("measures", "subset and point lengths differ or are empty"));
    }
    if subset.windows(2).any(|w| w[0] >= w[1]) || subset.iter().any(|&i| i >= d) {
        return Err(Error::validation("measures", "subset must be sorted, distinct and in range"));
    }
    Ok(())
}

/// Integrates out the coordinates not in `subset` on the log scale.
pub(crate) fn quadrature_marginal<D: OrthantDensity + ?Sized>(
    density: &D,
    subset: &[usize],
    y: &[f64],
) -> Result<f64> {
    let d = density.dim();
    check_subset(d, subset, y)?;
    check_positive("measures", y)?;
    if subset.len() == d {
        return density.density(y);
    }
    if subset.len() == 1 {
        // Standardized margins: Λ*(y_i > x) = 1/x.
        return Ok(1.0 / (y[0] * y[0]));
    }
    let rest: Vec<usize> = (0..d).filter(|i| !subset.contains(i)).collect();
    if rest.len() > 2 {
        return Err(Error::validation(
            "measures",
            "numerical marginalization supports at most two integrated coordinates",
        ));
    }
    let mut point = vec![0.0; d];
    for (&i, &v) in subset.iter().zip(y) {
        point[i] = v;
    }
    let scale = density.density(&fill_rest(&point, &rest, 1.0))?.max(1e-300);
    let abs_tol = 1e-14 * scale;
    let eval = |p: &[f64]| density.density(p).unwrap_or(f64::NAN);
    // Homogeneity puts the mass of the integrated coordinates near the scale
    // of the fixed ones.
    let center = y.iter().map(|v| v.ln()).sum::<f64>() / y.len() as f64;
    match rest.as_slice() {
        &[r] => quadrature::integrate_real(
            |t| {
                let mut p = point.clone();
                p[r] = (center + t).exp();
                if !in_range(p[r]) {
                    return 0.0;
                }
                eval(&p) * p[r]
            },
            abs_tol,
            1e-11,
        )
        .map(|e| e.value),
        &[r1, r2] => quadrature::integrate_real(
            |t1| {
                let mut p = point.clone();
                p[r1] = (center + t1).exp();
                if !in_range(p[r1]) {
                    return 0.0;
                }
                quadrature::integrate_real(
                    |t2| {
                        let mut q = p.clone();
                        q[r2] = (center + t2).exp();
                        if !in_range(q[r2]) {
                            return 0.0;
                        }
                        eval(&q) * q[r2]
                    },
                    abs_tol,
                    1e-11,
                )
                .map(|e| e.value * p[r1])
                .unwrap_or(f64::NAN)
            },
            abs_tol,
            1e-10,
        )
        .map(|e| e.value),
        _ => unreachable!(),
    }
}

/// Log-scale integrands vanish where exp under- or overflows.
pub(crate) fn in_range(y: f64) -> bool {
    y > 0.0 && y.is_finite()
}

fn fill_rest(point: &[f64], rest: &[usize], value: f64) -> Vec<f64> {
    let mut p = point.to_vec();
    for &r in rest {
        p[r] = value;
    }
    p
}

/// Dependence family tag as it appears in configs and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Hr,
    Clayton,
    Independence,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Hr => "hr",
            Family::Clayton => "clayton",
            Family::Independence => "independence",
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hr" | "husler-reiss" | "huesler-reiss" => Ok(Family::Hr),
            "clayton" => Ok(Family::Clayton),
            "independence" | "indep" => Ok(Family::Independence),
            other => Err(Error::validation("measures", format!("unknown family '{other}'"))),
        }
    }
}

/// Closed-form Lévy correlation of the symmetric all-orthant model:
/// 2 − 2Φ(√Γ/2) for Hüsler–Reiss and 2 − 2^θ for Clayton.
///
/// The Clayton expression does not agree with evaluating the Clayton tail at
/// (1, 1), which gives 2^(−1/θ) (see [`ClaytonParams::tail_chi`]); both are
/// exposed and callers choose explicitly. The Clayton formula accepts
/// θ ∈ (0, 1] so the boundary value 2 − 2¹ = 0 can be evaluated.
pub fn chi_closed_form(family: Family, parameter: f64) -> Result<f64> {
    match family {
        Family::Hr => {
            if !(parameter >= 0.0 && parameter.is_finite()) {
                return Err(Error::validation("measures", "HR gamma must be finite and >= 0"));
            }
            Ok(hr_chi(parameter))
        }
        Family::Clayton => {
            if !(parameter > 0.0 && parameter <= 1.0) {
                return Err(Error::validation("measures", "Clayton theta must lie in (0, 1]"));
            }
            Ok(2.0 - 2f64.powf(parameter))
        }
        Family::Independence => Ok(0.0),
    }
}

/// [`chi_closed_form`] keyed by family name; unknown names are an error.
pub fn chi_closed_form_named(family: &str, parameter: f64) -> Result<f64> {
    chi_closed_form(family.parse()?, parameter)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hr_chi_values() {
        assert!((chi_closed_form(Family::Hr, 1e-14).unwrap() - 1.0).abs() < 1e-7);
        let want = 2.0 - 2.0 * crate::normal::cdf(1.0);
        assert!((chi_closed_form(Family::Hr, 4.0).unwrap() - want).abs() < 1e-15);
        assert!((want - 0.317_310_507_862_914).abs() < 1e-12);
    }

    #[test]
    fn clayton_published_formula() {
        assert_eq!(chi_closed_form(Family::Clayton, 1.0).unwrap(), 0.0);
        assert!((chi_closed_form(Family::Clayton, 0.5).unwrap() - (2.0 - 2f64.sqrt())).abs() < 1e-15);
        assert!(chi_closed_form(Family::Clayton, 1.5).is_err());
    }

    #[test]
    fn unknown_family_is_rejected() {
        assert!(chi_closed_form_named("gumbel", 1.0).is_err());
        assert_eq!(chi_closed_form_named("independence", 0.0).unwrap(), 0.0);
    }
}
