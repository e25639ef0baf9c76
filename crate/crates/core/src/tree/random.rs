use std::collections::BinaryHeap;
use std::cmp::Reverse;

use rand::Rng;

use super::TreeTopology;
use crate::error::{Error, Result};

/// Uniformly random labeled tree on `d` vertices, decoded from a uniformly
/// random Prüfer sequence of length `d − 2`.
pub fn random_tree<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<TreeTopology> {
    if d < 2 {
        return Err(Error::validation("tree", format!("random tree needs d >= 2, got {d}")));
    }
    let code: Vec<usize> = (0..d - 2).map(|_| rng.random_range(0..d)).collect();
    from_prufer(d, &code)
}

pub(crate) fn from_prufer(d: usize, code: &[usize]) -> Result<TreeTopology> {
    let mut degree = vec![1usize; d];
    for &v in code {
        degree[v] += 1;
    }
    let mut leaves: BinaryHeap<Reverse<usize>> =
        (0..d).filter(|&v| degree[v] == 1).map(Reverse).collect();
    let mut edges = Vec::with_capacity(d - 1);
    for &v in code {
        let Reverse(leaf) = leaves.pop().expect("a Prüfer code always leaves a leaf");
        edges.push((leaf, v));
        degree[v] -= 1;
        if degree[v] == 1 {
            leaves.push(Reverse(v));
        }
    }
    let Reverse(u) = leaves.pop().expect("two vertices remain");
    let Reverse(w) = leaves.pop().expect("two vertices remain");
    edges.push((u, w));
    TreeTopology::new(d, edges)
}
