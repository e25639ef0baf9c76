//! JSON model configuration.
//!
//! ```json
//! {
//!   "family": "hr",
//!   "tree": [[1, 2], [2, 3]],
//!   "edge_params": {"1-2": 1.0, "2-3": 2.0},
//!   "m": {"1-2": 0.8, "2-3": 0.5},
//!   "margins": {"alpha": [1, 1, 1], "c_plus": [1, 1, 1], "c_minus": [1, 1, 1]},
//!   "drift": [0, 0, 0]
//! }
//! ```
//!
//! Vertex labels are 1-based. `m`, `margins` and `drift` default to the
//! symmetric model with standard 1-stable margins and no drift. Hüsler–Reiss
//! models may give a full `gamma` matrix instead of `edge_params`, which need
//! not be a tree metric; the tree then only drives the sign mechanism.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::measures::{Family, HrParams, MarginalSpec, OrthantWeights};
use crate::model::{Dependence, HeterogeneousStableModel};
use crate::tree::{BivariateFamily, Edge, EdgeMap, TreeTopology};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginsConfig {
    pub alpha: Vec<f64>,
    pub c_plus: Vec<f64>,
    pub c_minus: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub family: Family,
    /// Number of vertices; inferred from `tree` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    pub tree: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub edge_params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub m: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margins: Option<MarginsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<Vec<f64>>,
}

fn err(path: impl std::fmt::Display, msg: impl std::fmt::Display) -> Error {
    Error::validation("config", format!("{path}: {msg}"))
}

/// Parses an edge key such as "1-2" into a 0-based edge.
fn parse_edge_key(key: &str, field: &str) -> Result<Edge> {
    let parsed = key.split_once('-').and_then(|(a, b)| {
        let a: usize = a.trim().parse().ok()?;
        let b: usize = b.trim().parse().ok()?;
        (a >= 1 && b >= 1).then_some((a, b))
    });
    match parsed {
        Some((a, b)) => Ok(Edge::new(a - 1, b - 1)),
        None => Err(err(format!("{field}.{key}"), "edge keys look like \"i-j\" with 1-based labels")),
    }
}

fn edge_map(map: &BTreeMap<String, f64>, field: &str, tree: &TreeTopology) -> Result<EdgeMap<f64>> {
    let mut out = EdgeMap::new();
    for (key, &v) in map {
        let e = parse_edge_key(key, field)?;
        if tree.edge_index(e).is_none() {
            return Err(err(format!("{field}.{key}"), "not an edge of the tree"));
        }
        if out.insert(e, v).is_some() {
            return Err(err(format!("{field}.{key}"), "edge given twice"));
        }
    }
    Ok(out)
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::validation("config", e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// SHA-256 of the compact serialization. Keyed maps serialize in sorted
    /// order, so equal configs hash equally.
    pub fn hash(&self) -> Result<String> {
        let canonical = serde_json::to_string(self)?;
        Ok(hex::encode(Sha256::digest(canonical.as_bytes())))
    }

    pub fn dim(&self) -> usize {
        self.d
            .unwrap_or_else(|| self.tree.iter().flat_map(|e| e.iter().copied()).max().unwrap_or(1))
    }

    pub fn to_model(&self) -> Result<HeterogeneousStableModel> {
        let d = self.dim();
        if d == 0 {
            return Err(err("d", "must be at least 1"));
        }
        for (idx, e) in self.tree.iter().enumerate() {
            if e[0] == 0 || e[1] == 0 || e[0] > d || e[1] > d {
                return Err(err(format!("tree[{idx}]"), format!("labels must lie in 1..={d}")));
            }
        }
        let pairs: Vec<(usize, usize)> = self.tree.iter().map(|e| (e[0], e[1])).collect();
        let tree = TreeTopology::from_one_based(d, &pairs).map_err(|e| err("tree", e))?;

        let m = edge_map(&self.m, "m", &tree)?;
        let weights = if m.is_empty() {
            OrthantWeights::symmetric(&tree)
        } else {
            OrthantWeights::new(&tree, &m).map_err(|e| err("m", e))?
        };
        let margins = match &self.margins {
            None => MarginalSpec::standard(d),
            Some(mc) => {
                for (name, v) in [("alpha", &mc.alpha), ("c_plus", &mc.c_plus), ("c_minus", &mc.c_minus)] {
                    if v.len() != d {
                        return Err(err(format!("margins.{name}"), format!("needs {d} entries, got {}", v.len())));
                    }
                }
                for i in 0..d {
                    if !(mc.alpha[i] > 0.0 && mc.alpha[i] < 2.0) {
                        return Err(err(format!("margins.alpha[{i}]"), format!("must lie in (0, 2), got {}", mc.alpha[i])));
                    }
                    if !(mc.c_plus[i] > 0.0 && mc.c_plus[i].is_finite()) {
                        return Err(err(format!("margins.c_plus[{i}]"), "must be positive"));
                    }
                    if !(mc.c_minus[i] > 0.0 && mc.c_minus[i].is_finite()) {
                        return Err(err(format!("margins.c_minus[{i}]"), "must be positive"));
                    }
                }
                MarginalSpec::new(&mc.alpha, &mc.c_plus, &mc.c_minus).map_err(|e| err("margins", e))?
            }
        };
        let drift = match &self.drift {
            None => vec![0.0; d],
            Some(v) if v.len() != d => return Err(err("drift", format!("needs {d} entries, got {}", v.len()))),
            Some(v) => v.clone(),
        };

        let params = edge_map(&self.edge_params, "edge_params", &tree)?;
        let dependence = match (self.family, &self.gamma) {
            (Family::Hr, Some(g)) => {
                if !params.is_empty() {
                    return Err(err("gamma", "give either gamma or edge_params, not both"));
                }
                if g.len() != d || g.iter().any(|r| r.len() != d) {
                    return Err(err("gamma", format!("must be a {d}×{d} matrix")));
                }
                let mat = DMatrix::from_fn(d, d, |i, j| g[i][j]);
                Dependence::HuslerReiss(HrParams::new(mat).map_err(|e| err("gamma", e))?)
            }
            (_, Some(_)) => return Err(err("gamma", "only the hr family takes a full variogram")),
            (Family::Hr, None) => {
                check_complete(&tree, &params)?;
                for (e, &v) in &params {
                    if !(v > 0.0 && v.is_finite()) {
                        return Err(err(format!("edge_params.{e}"), format!("HR gamma must be positive, got {v}")));
                    }
                }
                Dependence::HuslerReiss(HrParams::from_tree(&tree, &params).map_err(|e| err("edge_params", e))?)
            }
            (Family::Clayton, None) => {
                check_complete(&tree, &params)?;
                let mut fam = Vec::new();
                for e in tree.edges() {
                    let v = params[e];
                    fam.push(BivariateFamily::clayton(v).map_err(|x| err(format!("edge_params.{e}"), x))?);
                }
                Dependence::EdgeWise(fam)
            }
            (Family::Independence, None) => {
                if !params.is_empty() {
                    return Err(err("edge_params", "the independence family takes no edge parameters"));
                }
                Dependence::EdgeWise(vec![BivariateFamily::Independence; tree.edges().len()])
            }
        };
        HeterogeneousStableModel::new(tree, dependence, weights, margins, drift)
    }
}

fn check_complete(tree: &TreeTopology, params: &EdgeMap<f64>) -> Result<()> {
    if let Some(e) = tree.edges().iter().find(|e| !params.contains_key(e)) {
        return Err(err(format!("edge_params.{e}"), "missing"));
    }
    Ok(())
}
