use super::{EdgeMap, TreeTopology};
use crate::error::{Error, Result};
use crate::measures::{
    check_positive, hr_bivariate_tail, hr_chi, quadrature_marginal, ClaytonParams, Family, HrParams,
    OrthantDensity, OrthantWeights, Sign,
};

/// Positive-quadrant model on a single tree edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BivariateFamily {
    HuslerReiss { gamma: f64 },
    Clayton(ClaytonParams),
    /// No joint mass off the axes; has no Lebesgue density.
    Independence,
}

impl BivariateFamily {
    pub fn husler_reiss(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::validation("tree", format!("HR edge gamma must be positive, got {gamma}")));
        }
        Ok(BivariateFamily::HuslerReiss { gamma })
    }

    pub fn clayton(theta: f64) -> Result<Self> {
        Ok(BivariateFamily::Clayton(ClaytonParams::new(theta)?))
    }

    pub fn family(&self) -> Family {
        match self {
            BivariateFamily::HuslerReiss { .. } => Family::Hr,
            BivariateFamily::Clayton(_) => Family::Clayton,
            BivariateFamily::Independence => Family::Independence,
        }
    }

    /// Density on the open positive quadrant.
    pub fn positive_density(&self, x1: f64, x2: f64) -> Result<f64> {
        match self {
            BivariateFamily::HuslerReiss { gamma } => {
                let g = nalgebra::DMatrix::from_row_slice(2, 2, &[0.0, *gamma, *gamma, 0.0]);
                HrParams::new(g)?.density(&[x1, x2])
            }
            BivariateFamily::Clayton(c) => c.bivariate_density(x1, x2),
            BivariateFamily::Independence => Err(Error::validation(
                "tree",
                "the independence edge model has no Lebesgue density",
            )),
        }
    }

    /// Joint tail Λ*₊(y₁ > x₁, y₂ > x₂) on the positive quadrant.
    pub fn positive_tail(&self, x1: f64, x2: f64) -> Result<f64> {
        match self {
            BivariateFamily::HuslerReiss { gamma } => hr_bivariate_tail(*gamma, x1, x2),
            BivariateFamily::Clayton(c) => c.tail(&[x1, x2]),
            BivariateFamily::Independence => {
                check_positive("tree", &[x1, x2])?;
                Ok(0.0)
            }
        }
    }

    /// Population Lévy correlation of the edge: the positive tail at (1, 1).
    pub fn chi(&self) -> f64 {
        match self {
            BivariateFamily::HuslerReiss { gamma } => hr_chi(*gamma),
            BivariateFamily::Clayton(c) => c.tail_chi(),
            BivariateFamily::Independence => 0.0,
        }
    }
}

/// Positive-orthant density built from edge bivariate densities through the
/// tree factorization Π_E λᵢⱼ/(λᵢλⱼ) · Π_V λᵢ with λᵢ(y) = y⁻².
#[derive(Debug, Clone)]
pub struct PositiveTreeDensity {
    tree: TreeTopology,
    families: Vec<BivariateFamily>,
    // HR edges are evaluated through a cached bivariate parameter object.
    hr_edges: Vec<Option<HrParams>>,
}

impl PositiveTreeDensity {
    pub fn new(tree: &TreeTopology, families: Vec<BivariateFamily>) -> Result<Self> {
        if families.len() != tree.edges().len() {
            return Err(Error::validation("tree", "one edge model per tree edge is required"));
        }
        let hr_edges = families
            .iter()
            .map(|f| match f {
                BivariateFamily::HuslerReiss { gamma } => {
                    HrParams::new(nalgebra::DMatrix::from_row_slice(2, 2, &[0.0, *gamma, *gamma, 0.0])).map(Some)
                }
                _ => Ok(None),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            tree: tree.clone(),
            families,
            hr_edges,
        })
    }

    pub fn tree(&self) -> &TreeTopology {
        &self.tree
    }

    pub fn families(&self) -> &[BivariateFamily] {
        &self.families
    }

    fn edge_ratio(&self, idx: usize, ya: f64, yb: f64) -> Result<f64> {
        let joint = match (&self.hr_edges[idx], &self.families[idx]) {
            (Some(hr), _) => hr.density(&[ya, yb])?,
            (None, f) => f.positive_density(ya, yb)?,
        };
        Ok(joint * ya * ya * yb * yb)
    }

    /// Factorized density restricted to the edges inside `vertices`; `y` is
    /// indexed by global vertex.
    fn restricted(&self, vertices: &[usize], y: &[f64]) -> Result<f64> {
        let mut value: f64 = vertices.iter().map(|&v| 1.0 / (y[v] * y[v])).product();
        for (idx, e) in self.tree.edges().iter().enumerate() {
            if vertices.contains(&e.a) && vertices.contains(&e.b) {
                value *= self.edge_ratio(idx, y[e.a], y[e.b])?;
            }
        }
        Ok(value)
    }
}

impl OrthantDensity for PositiveTreeDensity {
    fn dim(&self) -> usize {
        self.tree.dim()
    }

    fn density(&self, y: &[f64]) -> Result<f64> {
        if y.len() != self.tree.dim() {
            return Err(Error::validation("tree", "point dimension differs from tree size"));
        }
        check_positive("tree", y)?;
        let all: Vec<usize> = (0..y.len()).collect();
        self.restricted(&all, y)
    }

    /// Marginals on connected vertex sets are the factorization restricted to
    /// the induced subtree; other sets fall back to quadrature.
    fn marginal_density(&self, subset: &[usize], y: &[f64]) -> Result<f64> {
        crate::measures::check_subset(self.dim(), subset, y)?;
        check_positive("tree", y)?;
        if self.tree.is_connected_subset(subset) {
            let mut full = vec![1.0; self.dim()];
            for (&i, &v) in subset.iter().zip(y) {
                full[i] = v;
            }
            return self.restricted(subset, &full);
        }
        quadrature_marginal(self, subset, y)
    }
}

/// Per-edge bivariate models plus edge asymmetries: a full tree model for
/// the standardized measure on all orthants.
#[derive(Debug, Clone)]
pub struct EdgeModelSpec {
    positive: PositiveTreeDensity,
    weights: OrthantWeights,
}

impl EdgeModelSpec {
    pub fn new(tree: &TreeTopology, families: &EdgeMap<BivariateFamily>, weights: OrthantWeights) -> Result<Self> {
        if weights.tree() != tree {
            return Err(Error::validation("tree", "asymmetry weights are keyed by a different tree"));
        }
        let families = tree.align(families, "edge model")?;
        Ok(Self {
            positive: PositiveTreeDensity::new(tree, families)?,
            weights,
        })
    }

    pub fn tree(&self) -> &TreeTopology {
        self.positive.tree()
    }

    pub fn families(&self) -> &[BivariateFamily] {
        self.positive.families()
    }

    pub fn weights(&self) -> &OrthantWeights {
        &self.weights
    }

    pub fn positive(&self) -> &PositiveTreeDensity {
        &self.positive
    }

    /// Edge gammas when every edge is Hüsler–Reiss.
    pub fn hr_edge_gammas(&self) -> Option<EdgeMap<f64>> {
        self.tree()
            .edges()
            .iter()
            .zip(self.families())
            .map(|(e, f)| match f {
                BivariateFamily::HuslerReiss { gamma } => Some((*e, *gamma)),
                _ => None,
            })
            .collect()
    }

    pub fn density(&self, y: &[f64]) -> Result<f64> {
        tree_density(self, y)
    }

    /// Marginal density on a sorted subset at a point with nonzero coordinates.
    pub fn marginal_density(&self, subset: &[usize], y: &[f64]) -> Result<f64> {
        check_nonzero(y)?;
        let signs: Vec<Sign> = y.iter().map(|&v| Sign::of(v)).collect();
        let abs: Vec<f64> = y.iter().map(|v| v.abs()).collect();
        let w = self.weights.subset_weight(subset, &signs)?;
        if w == 0.0 {
            return Ok(0.0);
        }
        Ok(w * self.positive.marginal_density(subset, &abs)?)
    }
}

fn check_nonzero(y: &[f64]) -> Result<()> {
    if let Some(i) = y.iter().position(|&v| v == 0.0 || !v.is_finite()) {
        return Err(Error::domain(
            "tree",
            format!("coordinate {} must be nonzero and finite", i + 1),
        ));
    }
    Ok(())
}

/// Density of the tree model at `y` (all coordinates nonzero): m_s times the
/// factorized positive density at |y|, where s is the orthant of `y`.
pub fn tree_density(spec: &EdgeModelSpec, y: &[f64]) -> Result<f64> {
    if y.len() != spec.tree().dim() {
        return Err(Error::validation("tree", "point dimension differs from tree size"));
    }
    check_nonzero(y)?;
    let signs: Vec<Sign> = y.iter().map(|&v| Sign::of(v)).collect();
    let m = spec.weights.weight(&signs)?;
    if m == 0.0 {
        return Ok(0.0);
    }
    let abs: Vec<f64> = y.iter().map(|v| v.abs()).collect();
    Ok(m * spec.positive.density(&abs)?)
}
