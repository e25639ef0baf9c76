use nalgebra::DMatrix;

use super::{EdgeMap, TreeTopology};
use crate::error::{Error, Result};
use crate::measures::validate_variogram;

/// Completes a variogram from its values on tree edges: every entry is the sum
/// of edge values along the unique path between the two vertices.
pub fn tree_metric_complete(tree: &TreeTopology, edge_gammas: &EdgeMap<f64>) -> Result<DMatrix<f64>> {
    let values = tree.align(edge_gammas, "edge gamma")?;
    if let Some((e, v)) = tree
        .edges()
        .iter()
        .zip(&values)
        .find(|(_, v)| !(v.is_finite() && **v > 0.0))
    {
        return Err(Error::validation(
            "tree",
            format!("edge gamma for {e} must be positive and finite, got {v}"),
        ));
    }
    let d = tree.dim();
    let mut gamma = DMatrix::zeros(d, d);
    for source in 0..d {
        for (child, parent, idx) in tree.bfs_from(source) {
            gamma[(source, child)] = gamma[(source, parent)] + values[idx];
        }
    }
    // Symmetrize away any rounding difference between the two traversal directions.
    let gamma = 0.5 * (&gamma + gamma.transpose());
    validate_variogram(&gamma)?;
    Ok(gamma)
}
