use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tree::union_find::DisjointSet;
use crate::tree::TreeTopology;

/// Spanning tree with a flag for whether another tree attains the same
/// total weight.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanningTree {
    pub tree: TreeTopology,
    pub ambiguous: bool,
}

fn check_square(w: &DMatrix<f64>, what: &str) -> Result<usize> {
    let d = w.nrows();
    if d == 0 || w.ncols() != d {
        return Err(Error::validation("learn", format!("{what} must be a nonempty square matrix")));
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let (a, b) = (w[(i, j)], w[(j, i)]);
            if a.is_nan() || b.is_nan() {
                return Err(Error::validation("learn", format!("{what} has NaN at ({}, {})", i + 1, j + 1)));
            }
            let same = a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
            if !same {
                return Err(Error::validation("learn", format!("{what} is not symmetric at ({}, {})", i + 1, j + 1)));
            }
        }
    }
    Ok(d)
}

/// Kruskal over candidate edges already in processing order. `better(a, b)`
/// is true when weight a is strictly preferred to b.
fn kruskal(
    d: usize,
    mut candidates: Vec<(f64, usize, usize)>,
    order: impl Fn(&(f64, usize, usize), &(f64, usize, usize)) -> std::cmp::Ordering,
    weight: impl Fn(usize, usize) -> Option<f64>,
) -> Result<SpanningTree> {
    candidates.sort_by(&order);
    let mut dsu = DisjointSet::new(d);
    let mut chosen = Vec::with_capacity(d.saturating_sub(1));
    for &(_, i, j) in &candidates {
        if dsu.union(i, j) {
            chosen.push((i, j));
        }
    }
    if chosen.len() + 1 < d {
        let parts: Vec<String> = dsu
            .components()
            .into_iter()
            .map(|c| {
                let labels: Vec<String> = c.iter().map(|v| (v + 1).to_string()).collect();
                format!("{{{}}}", labels.join(", "))
            })
            .collect();
        return Err(Error::numerical(
            "learn",
            format!("finite-weight graph is disconnected; components: {}", parts.join(" ")),
        ));
    }
    let tree = TreeTopology::new(d, chosen)?;
    // A non-tree edge tying with the worst edge on its tree path can be
    // swapped in without changing the total weight.
    let mut ambiguous = false;
    'outer: for &(w, i, j) in &candidates {
        if tree.has_edge(i, j) {
            continue;
        }
        for idx in tree.path(i, j) {
            let e = tree.edges()[idx];
            if weight(e.a, e.b) == Some(w) {
                ambiguous = true;
                break 'outer;
            }
        }
    }
    Ok(SpanningTree { tree, ambiguous })
}

/// Minimum spanning tree of a symmetric weight matrix with entries in
/// (−∞, +∞]. Infinite weights are not edges. Ties are broken by the
/// lexicographic order of the 1-based vertex pairs.
pub fn minimum_spanning_tree(weights: &DMatrix<f64>) -> Result<SpanningTree> {
    let d = check_square(weights, "weight matrix")?;
    let mut candidates = Vec::new();
    for i in 0..d {
        for j in (i + 1)..d {
            let w = weights[(i, j)];
            if w == f64::NEG_INFINITY {
                return Err(Error::validation("learn", format!("weight −∞ at ({}, {})", i + 1, j + 1)));
            }
            if w.is_finite() {
                candidates.push((w, i, j));
            }
        }
    }
    kruskal(
        d,
        candidates,
        |a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))),
        |i, j| Some(weights[(i, j)]),
    )
}

pub fn mst(weights: &DMatrix<f64>) -> Result<TreeTopology> {
    minimum_spanning_tree(weights).map(|s| s.tree)
}

/// Maximum spanning tree of a correlation matrix with nonnegative entries;
/// zero entries are not edges. Same tie-breaking as [`minimum_spanning_tree`],
/// so it returns the same tree as the minimum spanning tree of −log χ.
pub fn max_spanning_tree(chi: &DMatrix<f64>) -> Result<SpanningTree> {
    let d = check_square(chi, "correlation matrix")?;
    let mut candidates = Vec::new();
    for i in 0..d {
        for j in (i + 1)..d {
            let c = chi[(i, j)];
            if c < 0.0 || c.is_infinite() {
                return Err(Error::validation("learn", format!("correlation {c} at ({}, {})", i + 1, j + 1)));
            }
            if c > 0.0 {
                candidates.push((c, i, j));
            }
        }
    }
    kruskal(
        d,
        candidates,
        |a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))),
        |i, j| Some(chi[(i, j)]),
    )
}

/// −log χ with zero correlations mapped to +∞.
pub fn neg_log_weights(chi: &DMatrix<f64>) -> DMatrix<f64> {
    chi.map(|c| if c > 0.0 { -c.ln() } else { f64::INFINITY })
}
