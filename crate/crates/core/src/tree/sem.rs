use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Support rays of a linear structural equation model X = BX + Z.
///
/// `coefficients[(i, j)]` is the effect of component `j` on component `i`.
/// Returns (I − B)⁻¹, whose columns span the rays carrying the Lévy measure.
pub fn dag_sem_support(coefficients: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = coefficients.nrows();
    if coefficients.ncols() != d {
        return Err(Error::validation("tree", "coefficient matrix must be square"));
    }
    if coefficients.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("tree", "coefficients must be finite"));
    }
    // Kahn's algorithm on the graph j → i for every nonzero β_ij.
    let mut indegree = vec![0usize; d];
    for i in 0..d {
        for j in 0..d {
            if coefficients[(i, j)] != 0.0 {
                if i == j {
                    return Err(Error::validation(
                        "tree",
                        format!("self-loop coefficient at component {}", i + 1),
                    ));
                }
                indegree[i] += 1;
            }
        }
    }
    let mut ready: Vec<usize> = (0..d).filter(|&v| indegree[v] == 0).collect();
    let mut visited = 0;
    while let Some(j) = ready.pop() {
        visited += 1;
        for i in 0..d {
            if coefficients[(i, j)] != 0.0 {
                indegree[i] -= 1;
                if indegree[i] == 0 {
                    ready.push(i);
                }
            }
        }
    }
    if visited != d {
        let cyclic: Vec<String> = (0..d)
            .filter(|&v| indegree[v] > 0)
            .map(|v| (v + 1).to_string())
            .collect();
        return Err(Error::validation(
            "tree",
            format!("coefficient structure is cyclic through components {}", cyclic.join(",")),
        ));
    }
    let system = DMatrix::identity(d, d) - coefficients;
    system
        .try_inverse()
        .ok_or_else(|| Error::numerical("tree", "I − B is singular"))
}
