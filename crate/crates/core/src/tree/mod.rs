//! Tree topologies and the tree-structured parts of the model: tree-metric
//! completion of variograms, tree-factorized densities, random trees and
//! linear structural equation supports.

mod density;
pub mod io;
mod metric;
mod random;
mod sem;
pub(crate) mod union_find;

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use union_find::DisjointSet;

pub use density::{tree_density, BivariateFamily, EdgeModelSpec, PositiveTreeDensity};
pub use metric::tree_metric_complete;
pub use random::random_tree;
pub use sem::dag_sem_support;

/// Undirected edge between two 0-based vertices, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
}

impl Edge {
    pub fn new(i: usize, j: usize) -> Self {
        if i <= j {
            Edge { a: i, b: j }
        } else {
            Edge { a: j, b: i }
        }
    }

    pub fn other(&self, v: usize) -> usize {
        if v == self.a {
            self.b
        } else {
            self.a
        }
    }

    pub fn contains(&self, v: usize) -> bool {
        self.a == v || self.b == v
    }
}

/// Displays with 1-based labels, matching the file formats.
impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.a + 1, self.b + 1)
    }
}

pub type EdgeMap<T> = BTreeMap<Edge, T>;

/// A labeled tree on vertices `0..d`. Edges are kept in lexicographic order,
/// so two topologies compare equal exactly when their edge sets agree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeTopology {
    d: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl TreeTopology {
    pub fn new(d: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if d == 0 {
            return Err(Error::validation("tree", "a tree needs at least one vertex"));
        }
        let mut list: Vec<Edge> = Vec::new();
        for (i, j) in edges {
            if i >= d || j >= d {
                return Err(Error::validation(
                    "tree",
                    format!("edge ({}, {}) references a vertex outside 1..={d}", i + 1, j + 1),
                ));
            }
            if i == j {
                return Err(Error::validation("tree", format!("self-loop at vertex {}", i + 1)));
            }
            list.push(Edge::new(i, j));
        }
        list.sort();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::validation("tree", format!("duplicate edge {}", w[0])));
        }
        if list.len() != d - 1 {
            return Err(Error::validation(
                "tree",
                format!("a tree on {d} vertices has {} edges, got {}", d - 1, list.len()),
            ));
        }
        let mut dsu = DisjointSet::new(d);
        for e in &list {
            if !dsu.union(e.a, e.b) {
                return Err(Error::validation("tree", format!("edge {e} closes a cycle")));
            }
        }
        let mut adjacency = vec![Vec::new(); d];
        for (idx, e) in list.iter().enumerate() {
            adjacency[e.a].push((e.b, idx));
            adjacency[e.b].push((e.a, idx));
        }
        Ok(Self {
            d,
            edges: list,
            adjacency,
        })
    }

    /// Builds from 1-based vertex pairs as they appear in files and configs.
    pub fn from_one_based(d: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut zero = Vec::with_capacity(edges.len());
        for &(i, j) in edges {
            if i == 0 || j == 0 {
                return Err(Error::validation("tree", "vertex labels are 1-based"));
            }
            zero.push((i - 1, j - 1));
        }
        Self::new(d, zero)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_index(&self, e: Edge) -> Option<usize> {
        self.edges.binary_search(&e).ok()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edge_index(Edge::new(i, j)).is_some()
    }

    /// Neighbours of `v` with the index of the connecting edge.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    /// Breadth-first traversal from `root`: `(child, parent, edge index)`
    /// for every vertex except the root.
    pub fn bfs_from(&self, root: usize) -> Vec<(usize, usize, usize)> {
        let mut order = Vec::with_capacity(self.d.saturating_sub(1));
        let mut seen = vec![false; self.d];
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(v) = queue.pop_front() {
            for &(w, idx) in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    order.push((w, v, idx));
                    queue.push_back(w);
                }
            }
        }
        order
    }

    /// Parent pointers (vertex, edge index) of a BFS tree rooted at `root`.
    pub(crate) fn parents_from(&self, root: usize) -> Vec<Option<(usize, usize)>> {
        let mut parents = vec![None; self.d];
        for (child, parent, idx) in self.bfs_from(root) {
            parents[child] = Some((parent, idx));
        }
        parents
    }

    /// Edge indices on the unique path between `from` and `to`.
    pub fn path(&self, from: usize, to: usize) -> Vec<usize> {
        let parents = self.parents_from(from);
        let mut path = Vec::new();
        let mut v = to;
        while let Some((p, idx)) = parents[v] {
            path.push(idx);
            v = p;
        }
        path.reverse();
        path
    }

    /// Whether `vertices` induce a connected subtree.
    pub fn is_connected_subset(&self, vertices: &[usize]) -> bool {
        if vertices.is_empty() {
            return false;
        }
        let mut inside = vec![false; self.d];
        for &v in vertices {
            inside[v] = true;
        }
        let mut seen = vec![false; self.d];
        let mut stack = vec![vertices[0]];
        seen[vertices[0]] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(w, _) in &self.adjacency[v] {
                if inside[w] && !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == vertices.len()
    }

    /// Applies the vertex relabeling `v ↦ perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.d {
            return Err(Error::validation("tree", "permutation length differs from tree size"));
        }
        Self::new(self.d, self.edges.iter().map(|e| (perm[e.a], perm[e.b])))
    }

    /// Lines up a per-edge map with the edge order of this tree.
    pub fn align<T: Clone>(&self, map: &EdgeMap<T>, what: &str) -> Result<Vec<T>> {
        let mut out = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            match map.get(e) {
                Some(v) => out.push(v.clone()),
                None => {
                    return Err(Error::validation(
                        "tree",
                        format!("{what}: missing value for edge {e}"),
                    ))
                }
            }
        }
        if let Some(extra) = map.keys().find(|e| self.edge_index(**e).is_none()) {
            return Err(Error::validation(
                "tree",
                format!("{what}: edge {extra} is not in the tree"),
            ));
        }
        Ok(out)
    }
}

impl fmt::Display for TreeTopology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.edges.iter().map(|e| e.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}
