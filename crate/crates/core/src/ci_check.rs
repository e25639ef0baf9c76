//! Numerical checks of conditional independence for Lévy measures: pointwise
//! density factorization and discretized checks on product rectangles.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::{OrthantDensity, OrthantWeights, Sign};
use crate::tree::EdgeModelSpec;

/// Density of a Lévy measure on ℝ^d \ {0} together with its marginals.
pub trait LevyDensity: Sync {
    fn dim(&self) -> usize;

    /// Density at a point with all coordinates nonzero.
    fn density(&self, y: &[f64]) -> Result<f64>;

    /// Marginal density on the sorted coordinate set `subset` at `y`, one
    /// entry of `y` per element of `subset`.
    fn marginal_density(&self, subset: &[usize], y: &[f64]) -> Result<f64>;
}

/// Positive-orthant density spread over all orthants with tree weights m_s.
#[derive(Debug, Clone)]
pub struct SignedMeasure<D> {
    inner: D,
    weights: OrthantWeights,
}

impl<D: OrthantDensity> SignedMeasure<D> {
    pub fn new(inner: D, weights: OrthantWeights) -> Result<Self> {
        if inner.dim() != weights.tree().dim() {
            return Err(Error::validation("ci_check", "density and weight dimensions differ"));
        }
        Ok(Self { inner, weights })
    }

    pub fn inner(&self) -> &D {
        &self.inner
    }
}

fn split_signs(y: &[f64]) -> Result<(Vec<Sign>, Vec<f64>)> {
    if let Some(i) = y.iter().position(|&v| v == 0.0 || !v.is_finite()) {
        return Err(Error::domain("ci_check", format!("coordinate {} must be nonzero and finite", i + 1)));
    }
    Ok((y.iter().map(|&v| Sign::of(v)).collect(), y.iter().map(|v| v.abs()).collect()))
}

impl<D: OrthantDensity> LevyDensity for SignedMeasure<D> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn density(&self, y: &[f64]) -> Result<f64> {
        let (signs, abs) = split_signs(y)?;
        let w = self.weights.weight(&signs)?;
        if w == 0.0 {
            return Ok(0.0);
        }
        Ok(w * self.inner.density(&abs)?)
    }

    fn marginal_density(&self, subset: &[usize], y: &[f64]) -> Result<f64> {
        let (signs, abs) = split_signs(y)?;
        let w = self.weights.subset_weight(subset, &signs)?;
        if w == 0.0 {
            return Ok(0.0);
        }
        Ok(w * self.inner.marginal_density(subset, &abs)?)
    }
}

impl LevyDensity for EdgeModelSpec {
    fn dim(&self) -> usize {
        self.tree().dim()
    }

    fn density(&self, y: &[f64]) -> Result<f64> {
        EdgeModelSpec::density(self, y)
    }

    fn marginal_density(&self, subset: &[usize], y: &[f64]) -> Result<f64> {
        EdgeModelSpec::marginal_density(self, subset, y)
    }
}

/// Disjoint A, B, C covering all coordinates, with C nonempty. A or B may be
/// empty, in which case the statement is trivially true.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    a: Vec<usize>,
    b: Vec<usize>,
    c: Vec<usize>,
}

impl Partition {
    pub fn new(d: usize, mut a: Vec<usize>, mut b: Vec<usize>, mut c: Vec<usize>) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::validation("ci_check", "the conditioning set C must be nonempty"));
        }
        for s in [&mut a, &mut b, &mut c] {
            s.sort_unstable();
        }
        let mut seen = vec![0u8; d];
        for &v in a.iter().chain(&b).chain(&c) {
            if v >= d {
                return Err(Error::validation("ci_check", format!("vertex {} outside 1..={d}", v + 1)));
            }
            seen[v] += 1;
        }
        if let Some(v) = seen.iter().position(|&s| s != 1) {
            return Err(Error::validation(
                "ci_check",
                format!("vertex {} appears {} times; A, B, C must partition 1..={d}", v + 1, seen[v]),
            ));
        }
        Ok(Self { a, b, c })
    }

    pub fn a(&self) -> &[usize] {
        &self.a
    }

    pub fn b(&self) -> &[usize] {
        &self.b
    }

    pub fn c(&self) -> &[usize] {
        &self.c
    }

    fn union(x: &[usize], y: &[usize]) -> Vec<usize> {
        let mut u: Vec<usize> = x.iter().chain(y).copied().collect();
        u.sort_unstable();
        u
    }
}

fn marginal_at<D: LevyDensity + ?Sized>(density: &D, subset: &[usize], y: &[f64]) -> Result<f64> {
    if subset.len() == density.dim() {
        return density.density(y);
    }
    let sub: Vec<f64> = subset.iter().map(|&i| y[i]).collect();
    density.marginal_density(subset, &sub)
}

/// max over points of |λ(y)λ_C(y_C) − λ_{A∪C}(y_{A∪C})λ_{B∪C}(y_{B∪C})| / (λ(y)λ_C(y_C)).
pub fn factorization_residual<D: LevyDensity + ?Sized>(
    density: &D,
    partition: &Partition,
    points: &[Vec<f64>],
) -> Result<f64> {
    let d = density.dim();
    let ac = Partition::union(&partition.a, &partition.c);
    let bc = Partition::union(&partition.b, &partition.c);
    let mut worst = 0.0f64;
    for y in points {
        if y.len() != d {
            return Err(Error::validation("ci_check", "sample point dimension mismatch"));
        }
        let lhs = density.density(y)? * marginal_at(density, &partition.c, y)?;
        if lhs <= 0.0 {
            return Err(Error::numerical("ci_check", "density vanishes at a sample point"));
        }
        let rhs = marginal_at(density, &ac, y)? * marginal_at(density, &bc, y)?;
        worst = worst.max((lhs - rhs).abs() / lhs);
    }
    Ok(worst)
}

/// Product rectangle bounded away from the origin. Each interval lies on
/// one side of zero so the grid can be laid out on |y| in log scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Rectangle {
    lower: Vec<f64>,
    upper: Vec<f64>,
    resolution: Vec<usize>,
}

impl Rectangle {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, resolution: Vec<usize>) -> Result<Self> {
        let d = lower.len();
        if d == 0 || upper.len() != d || resolution.len() != d {
            return Err(Error::validation("ci_check", "rectangle bounds and resolution must have equal nonzero length"));
        }
        for i in 0..d {
            let (a, b) = (lower[i], upper[i]);
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(Error::validation("ci_check", format!("interval {} must satisfy a < b", i + 1)));
            }
            if a <= 0.0 && b >= 0.0 {
                return Err(Error::validation(
                    "ci_check",
                    format!("interval {} = [{a}, {b}] touches zero", i + 1),
                ));
            }
            if resolution[i] == 0 {
                return Err(Error::validation("ci_check", "grid resolution must be positive"));
            }
        }
        Ok(Self { lower, upper, resolution })
    }

    /// Cube [a, b]^d with `res` cells per side.
    pub fn cube(d: usize, a: f64, b: f64, res: usize) -> Result<Self> {
        Self::new(vec![a; d], vec![b; d], vec![res; d])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    fn with_resolution(&self, resolution: Vec<usize>) -> Self {
        Self {
            lower: self.lower.clone(),
            upper: self.upper.clone(),
            resolution,
        }
    }

    /// Cell midpoints and log-scale cell widths times |midpoint| per axis.
    fn axes(&self) -> Vec<(Vec<f64>, Vec<f64>)> {
        (0..self.dim())
            .map(|i| {
                let sign = if self.lower[i] > 0.0 { 1.0 } else { -1.0 };
                let (lo, hi) = {
                    let (x, y) = (self.lower[i].abs().ln(), self.upper[i].abs().ln());
                    (x.min(y), x.max(y))
                };
                let n = self.resolution[i];
                let h = (hi - lo) / n as f64;
                let mids: Vec<f64> = (0..n).map(|c| sign * (lo + (c as f64 + 0.5) * h).exp()).collect();
                let widths = mids.iter().map(|m| m.abs() * h).collect();
                (mids, widths)
            })
            .collect()
    }
}

/// Cell masses of Λ on the rectangle grid, row-major in coordinate order.
fn cell_masses<D: LevyDensity + ?Sized>(density: &D, rect: &Rectangle) -> Result<Vec<f64>> {
    let d = rect.dim();
    let axes = rect.axes();
    let res = rect.resolution();
    let total: usize = res.iter().product();
    let stride0 = total / res[0];
    (0..res[0])
        .into_par_iter()
        .map(|c0| -> Result<Vec<f64>> {
            let mut out = Vec::with_capacity(stride0);
            let mut idx = vec![0usize; d];
            idx[0] = c0;
            let mut y = vec![0.0; d];
            for _ in 0..stride0 {
                let mut vol = 1.0;
                for i in 0..d {
                    y[i] = axes[i].0[idx[i]];
                    vol *= axes[i].1[idx[i]];
                }
                out.push(density.density(&y)? * vol);
                for i in (1..d).rev() {
                    idx[i] += 1;
                    if idx[i] < res[i] {
                        break;
                    }
                    idx[i] = 0;
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()
        .map(|parts| parts.concat())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CiReport {
    /// max over cells of |P(a,b|c) − P(a|c)P(b|c)| / (P(a|c)P(b|c)).
    pub violation: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Λ(R) from the grid.
    pub mass: f64,
    /// |Λ(R) − Λ(R) at half resolution|, an estimate of the quadrature error.
    pub mass_error: f64,
}

/// Discretizes the normalized restriction of Λ to `rect` and checks
/// A ⊥ B | C cell by cell.
pub fn rectangle_ci_check<D: LevyDensity + ?Sized>(
    density: &D,
    rect: &Rectangle,
    partition: &Partition,
    tolerance: f64,
) -> Result<CiReport> {
    let d = density.dim();
    if rect.dim() != d {
        return Err(Error::validation("ci_check", "rectangle and density dimensions differ"));
    }
    if d > 4 {
        return Err(Error::validation("ci_check", format!("rectangle checks support d <= 4, got {d}")));
    }
    let masses = cell_masses(density, rect)?;
    let mass: f64 = masses.iter().sum();
    if !(mass > 1e-12) {
        return Err(Error::domain("ci_check", format!("rectangle has Lévy mass {mass:e}; it must be positive")));
    }
    let coarse = rect.with_resolution(rect.resolution().iter().map(|&r| (r / 2).max(1)).collect());
    let coarse_mass: f64 = cell_masses(density, &coarse)?.iter().sum();

    let res = rect.resolution();
    let group_size = |g: &[usize]| g.iter().map(|&i| res[i]).product::<usize>();
    let (na, nb, nc) = (group_size(partition.a()), group_size(partition.b()), group_size(partition.c()));
    let mut p_abc = vec![0.0; na * nb * nc];
    let mut idx = vec![0usize; d];
    let flat = |g: &[usize], idx: &[usize]| g.iter().fold(0usize, |acc, &i| acc * res[i] + idx[i]);
    for &m in &masses {
        let (a, b, c) = (flat(partition.a(), &idx), flat(partition.b(), &idx), flat(partition.c(), &idx));
        p_abc[(a * nb + b) * nc + c] += m / mass;
        for i in (0..d).rev() {
            idx[i] += 1;
            if idx[i] < res[i] {
                break;
            }
            idx[i] = 0;
        }
    }
    let mut p_ac = vec![0.0; na * nc];
    let mut p_bc = vec![0.0; nb * nc];
    let mut p_c = vec![0.0; nc];
    for a in 0..na {
        for b in 0..nb {
            for c in 0..nc {
                let p = p_abc[(a * nb + b) * nc + c];
                p_ac[a * nc + c] += p;
                p_bc[b * nc + c] += p;
                p_c[c] += p;
            }
        }
    }
    let mut violation = 0.0f64;
    for a in 0..na {
        for b in 0..nb {
            for c in 0..nc {
                let product = p_ac[a * nc + c] * p_bc[b * nc + c];
                if product > 0.0 {
                    let joint = p_abc[(a * nb + b) * nc + c] * p_c[c];
                    violation = violation.max((joint - product).abs() / product);
                }
            }
        }
    }
    Ok(CiReport {
        violation,
        tolerance,
        passed: violation <= tolerance,
        mass,
        mass_error: (mass - coarse_mass).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::HrParams;
    use crate::tree::TreeTopology;
    use nalgebra::DMatrix;

    fn chain() -> TreeTopology {
        TreeTopology::new(3, [(0, 1), (1, 2)]).unwrap()
    }

    fn hr(g13: f64) -> SignedMeasure<HrParams> {
        let g = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, g13, 1.0, 0.0, 2.0, g13, 2.0, 0.0]);
        SignedMeasure::new(HrParams::new(g).unwrap(), OrthantWeights::symmetric(&chain())).unwrap()
    }

    /// Product of Pareto-type factors; CI holds for every partition.
    struct Product;

    impl LevyDensity for Product {
        fn dim(&self) -> usize {
            3
        }
        fn density(&self, y: &[f64]) -> Result<f64> {
            Ok(y.iter().map(|v| (-v.abs()).exp() / v.abs()).product())
        }
        fn marginal_density(&self, _: &[usize], _: &[f64]) -> Result<f64> {
            unreachable!()
        }
    }

    #[test]
    fn partitions_are_validated() {
        assert!(Partition::new(3, vec![0], vec![2], vec![]).is_err());
        assert!(Partition::new(3, vec![0], vec![1], vec![1]).is_err());
        assert!(Partition::new(3, vec![0], vec![], vec![1]).is_err());
        assert!(Partition::new(3, vec![0], vec![2], vec![3]).is_err());
        assert!(Partition::new(3, vec![0], vec![2], vec![1]).is_ok());
    }

    #[test]
    fn rectangles_are_validated() {
        assert!(Rectangle::new(vec![-1.0], vec![1.0], vec![4]).is_err());
        assert!(Rectangle::new(vec![2.0], vec![1.0], vec![4]).is_err());
        assert!(Rectangle::new(vec![1.0], vec![2.0], vec![0]).is_err());
        assert!(Rectangle::new(vec![-2.0, 1.0], vec![-1.0, 3.0], vec![4, 4]).is_ok());
    }

    #[test]
    fn residual_for_tree_and_perturbed_variograms() {
        let p = Partition::new(3, vec![0], vec![2], vec![1]).unwrap();
        let pts: Vec<Vec<f64>> = vec![vec![0.5, 1.2, 3.0], vec![-2.0, 0.7, 1.1], vec![1.0, -1.0, -4.0]];
        assert!(factorization_residual(&hr(3.0), &p, &pts).unwrap() <= 1e-8);
        assert!(factorization_residual(&hr(3.5), &p, &pts).unwrap() > 1e-3);
        let scaled: Vec<Vec<f64>> = pts.iter().map(|y| y.iter().map(|v| 7.0 * v).collect()).collect();
        let a = factorization_residual(&hr(3.5), &p, &pts).unwrap();
        let b = factorization_residual(&hr(3.5), &p, &scaled).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn empty_b_is_trivial() {
        let t = TreeTopology::new(2, [(0, 1)]).unwrap();
        let g = DMatrix::from_row_slice(2, 2, &[0.0, 1.5, 1.5, 0.0]);
        let m = SignedMeasure::new(HrParams::new(g).unwrap(), OrthantWeights::symmetric(&t)).unwrap();
        let p = Partition::new(2, vec![0], vec![], vec![1]).unwrap();
        assert_eq!(factorization_residual(&m, &p, &[vec![0.3, 2.0], vec![-1.0, 4.0]]).unwrap(), 0.0);
        let r = rectangle_ci_check(&m, &Rectangle::cube(2, 1.0, 2.0, 8).unwrap(), &p, 1e-12).unwrap();
        assert!(r.passed);
    }

    #[test]
    fn product_density_passes() {
        let p = Partition::new(3, vec![0], vec![1], vec![2]).unwrap();
        let r = rectangle_ci_check(&Product, &Rectangle::cube(3, 0.5, 3.0, 12).unwrap(), &p, 1e-12).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn perturbed_variogram_fails_on_a_rectangle() {
        let p = Partition::new(3, vec![0], vec![2], vec![1]).unwrap();
        let rect = Rectangle::cube(3, 1.0, 2.0, 16).unwrap();
        let good = rectangle_ci_check(&hr(3.0), &rect, &p, 1e-3).unwrap();
        assert!(good.passed && good.mass_error < 1e-3 * good.mass, "{good:?}");
        let bad = rectangle_ci_check(&hr(3.5), &rect, &p, 1e-3).unwrap();
        assert!(!bad.passed, "{bad:?}");
    }

    #[test]
    fn zero_mass_is_an_error() {
        let t = TreeTopology::new(2, [(0, 1)]).unwrap();
        let g = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        // All mass on ++ and −−, rectangle in +−.
        let w = OrthantWeights::from_values(&t, vec![1.0]).unwrap();
        let m = SignedMeasure::new(HrParams::new(g).unwrap(), w).unwrap();
        let p = Partition::new(2, vec![0], vec![], vec![1]).unwrap();
        let rect = Rectangle::new(vec![1.0, -2.0], vec![2.0, -1.0], vec![4, 4]).unwrap();
        assert!(rectangle_ci_check(&m, &rect, &p, 1e-3).is_err());
    }
}
