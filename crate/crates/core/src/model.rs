//! Heterogeneous stable models: a standardized dependence measure on a tree,
//! orthant asymmetry weights, stable marginal tails and a drift.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::measures::{Family, HrParams, MarginalSpec, OrthantWeights};
use crate::tree::{BivariateFamily, EdgeMap, EdgeModelSpec, TreeTopology};

/// Positive-orthant part of the standardized measure.
#[derive(Debug, Clone)]
pub enum Dependence {
    /// Joint Hüsler–Reiss measure with an arbitrary valid variogram. A tree
    /// model when the variogram is a tree metric.
    HuslerReiss(HrParams),
    /// Bivariate models on the tree edges glued by the tree factorization.
    EdgeWise(Vec<BivariateFamily>),
}

#[derive(Debug, Clone)]
pub struct HeterogeneousStableModel {
    tree: TreeTopology,
    dependence: Dependence,
    weights: OrthantWeights,
    margins: MarginalSpec,
    drift: Vec<f64>,
}

impl HeterogeneousStableModel {
    pub fn new(
        tree: TreeTopology,
        dependence: Dependence,
        weights: OrthantWeights,
        margins: MarginalSpec,
        drift: Vec<f64>,
    ) -> Result<Self> {
        let d = tree.dim();
        if d < 1 {
            return Err(Error::validation("model", "empty model"));
        }
        match &dependence {
            Dependence::HuslerReiss(hr) if hr.dim() != d => {
                return Err(Error::validation("model", "variogram size differs from the tree size"))
            }
            Dependence::EdgeWise(f) if f.len() != tree.edges().len() => {
                return Err(Error::validation("model", "one edge model per tree edge is required"))
            }
            _ => {}
        }
        if weights.tree() != &tree {
            return Err(Error::validation("model", "asymmetry weights are keyed by a different tree"));
        }
        if margins.dim() != d {
            return Err(Error::validation("model", format!("margins have dimension {}, expected {d}", margins.dim())));
        }
        if drift.len() != d {
            return Err(Error::validation("model", format!("drift has length {}, expected {d}", drift.len())));
        }
        if let Some(i) = drift.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation("model", format!("drift[{}] is not finite", i + 1)));
        }
        Ok(Self {
            tree,
            dependence,
            weights,
            margins,
            drift,
        })
    }

    /// Hüsler–Reiss tree model with the variogram completed from edge values.
    pub fn hr_tree(
        tree: TreeTopology,
        edge_gammas: &EdgeMap<f64>,
        weights: OrthantWeights,
        margins: MarginalSpec,
        drift: Vec<f64>,
    ) -> Result<Self> {
        let hr = HrParams::from_tree(&tree, edge_gammas)?;
        Self::new(tree, Dependence::HuslerReiss(hr), weights, margins, drift)
    }

    /// Symmetric Hüsler–Reiss tree model with standard 1-stable margins and
    /// no drift.
    pub fn symmetric_hr_tree(tree: TreeTopology, edge_gammas: &EdgeMap<f64>) -> Result<Self> {
        let d = tree.dim();
        let weights = OrthantWeights::symmetric(&tree);
        Self::hr_tree(tree, edge_gammas, weights, MarginalSpec::standard(d), vec![0.0; d])
    }

    pub fn edge_wise(
        tree: TreeTopology,
        families: &EdgeMap<BivariateFamily>,
        weights: OrthantWeights,
        margins: MarginalSpec,
        drift: Vec<f64>,
    ) -> Result<Self> {
        let families = tree.align(families, "edge model")?;
        Self::new(tree, Dependence::EdgeWise(families), weights, margins, drift)
    }

    pub fn dim(&self) -> usize {
        self.tree.dim()
    }

    pub fn tree(&self) -> &TreeTopology {
        &self.tree
    }

    pub fn dependence(&self) -> &Dependence {
        &self.dependence
    }

    pub fn weights(&self) -> &OrthantWeights {
        &self.weights
    }

    pub fn margins(&self) -> &MarginalSpec {
        &self.margins
    }

    pub fn drift(&self) -> &[f64] {
        &self.drift
    }

    /// Family label; edge-wise models report the family shared by all edges,
    /// or `None` when edges mix families.
    pub fn family(&self) -> Option<Family> {
        match &self.dependence {
            Dependence::HuslerReiss(_) => Some(Family::Hr),
            Dependence::EdgeWise(f) => {
                let first = f.first().map(|b| b.family()).unwrap_or(Family::Independence);
                f.iter().all(|b| b.family() == first).then_some(first)
            }
        }
    }

    /// Tree-factorized view for density evaluation; `None` for edge-wise
    /// models with independence edges, which have no density.
    pub fn edge_spec(&self) -> Result<EdgeModelSpec> {
        let families: Vec<BivariateFamily> = match &self.dependence {
            Dependence::HuslerReiss(hr) => self
                .tree
                .edges()
                .iter()
                .map(|e| BivariateFamily::husler_reiss(hr.gamma()[(e.a, e.b)]))
                .collect::<Result<_>>()?,
            Dependence::EdgeWise(f) => f.clone(),
        };
        let map: EdgeMap<BivariateFamily> = self.tree.edges().iter().copied().zip(families).collect();
        EdgeModelSpec::new(&self.tree, &map, self.weights.clone())
    }

    /// Population Lévy correlation χᵢⱼ = Λ*₊(yᵢ > 1, yⱼ > 1). Available for
    /// every pair under Hüsler–Reiss and for adjacent pairs otherwise.
    pub fn chi(&self, i: usize, j: usize) -> Option<f64> {
        if i == j {
            return Some(1.0);
        }
        match &self.dependence {
            Dependence::HuslerReiss(hr) => Some(crate::measures::hr_chi(hr.gamma()[(i, j)])),
            Dependence::EdgeWise(f) => self
                .tree
                .edge_index(crate::tree::Edge::new(i, j))
                .map(|idx| f[idx].chi()),
        }
    }

    /// Full population χ matrix when every pair is available.
    pub fn chi_matrix(&self) -> Option<DMatrix<f64>> {
        let d = self.dim();
        let mut out = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                out[(i, j)] = self.chi(i, j)?;
            }
        }
        Some(out)
    }

    /// Closed form of Λ*(‖y‖∞ ≥ ε) where one is available: the independence
    /// family in any dimension, Hüsler–Reiss for d ≤ 3 and single-edge models.
    pub fn truncated_mass(&self, epsilon: f64) -> Option<f64> {
        if !(epsilon > 0.0) {
            return None;
        }
        let d = self.dim();
        // Λ* = Σ_s m_s · (reflected Λ*₊) with Σ_s m_s = 2.
        let positive = match &self.dependence {
            Dependence::HuslerReiss(hr) if d <= 3 => hr.exponent_measure(&vec![1.0; d]).ok()?,
            Dependence::EdgeWise(f) if f.iter().all(|b| *b == BivariateFamily::Independence) => d as f64,
            Dependence::EdgeWise(f) if d == 2 => 2.0 - f[0].positive_tail(1.0, 1.0).ok()?,
            _ => return None,
        };
        Some(2.0 * positive / epsilon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::Edge;

    fn chain3() -> TreeTopology {
        TreeTopology::new(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn independence_mass_is_two_d_over_eps() {
        let t = chain3();
        let fam = EdgeMap::from([
            (Edge::new(0, 1), BivariateFamily::Independence),
            (Edge::new(1, 2), BivariateFamily::Independence),
        ]);
        let m = HeterogeneousStableModel::edge_wise(
            t.clone(),
            &fam,
            OrthantWeights::symmetric(&t),
            MarginalSpec::standard(3),
            vec![0.0; 3],
        )
        .unwrap();
        assert_eq!(m.truncated_mass(0.5), Some(12.0));
        assert_eq!(m.family(), Some(Family::Independence));
    }

    #[test]
    fn bivariate_hr_mass_by_inclusion_exclusion() {
        let t = TreeTopology::new(2, [(0, 1)]).unwrap();
        let m = HeterogeneousStableModel::symmetric_hr_tree(t, &EdgeMap::from([(Edge::new(0, 1), 4.0)])).unwrap();
        let chi = 2.0 - 2.0 * crate::normal::cdf(1.0);
        let want = 2.0 * (2.0 - chi) / 0.1;
        assert!((m.truncated_mass(0.1).unwrap() - want).abs() < 1e-12);
        assert!((m.chi(0, 1).unwrap() - chi).abs() < 1e-15);
    }

    #[test]
    fn mismatched_parts_are_rejected() {
        let t = chain3();
        let g = EdgeMap::from([(Edge::new(0, 1), 1.0), (Edge::new(1, 2), 1.0)]);
        let w = OrthantWeights::symmetric(&t);
        assert!(HeterogeneousStableModel::hr_tree(t.clone(), &g, w.clone(), MarginalSpec::standard(2), vec![0.0; 3]).is_err());
        assert!(HeterogeneousStableModel::hr_tree(t, &g, w, MarginalSpec::standard(3), vec![0.0; 2]).is_err());
    }
}
