//! Tree import and export: Graphviz DOT with numeric edge attributes, and the
//! edge-list CSV `i,j,gamma,m`. Vertex labels in files are 1-based.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{Edge, EdgeMap, TreeTopology};
use crate::error::{Error, Result};

/// Named numeric attributes, one vector per attribute in the tree's edge order.
pub type EdgeAttributes<'a> = [(&'a str, &'a [f64])];

pub fn to_dot(tree: &TreeTopology, attributes: &EdgeAttributes<'_>) -> Result<String> {
    for (name, values) in attributes {
        if values.len() != tree.edges().len() {
            return Err(Error::validation("tree", format!("attribute {name} needs one value per edge")));
        }
        if !is_identifier(name) {
            return Err(Error::validation("tree", format!("attribute name {name:?} is not a DOT identifier")));
        }
    }
    let mut out = String::from("graph levytree {\n");
    for v in 0..tree.dim() {
        out.push_str(&format!("  {};\n", v + 1));
    }
    for (idx, e) in tree.edges().iter().enumerate() {
        out.push_str(&format!("  {} -- {}", e.a + 1, e.b + 1));
        if !attributes.is_empty() {
            let attrs: Vec<String> = attributes
                .iter()
                .map(|(name, values)| format!("{name}={}", values[idx]))
                .collect();
            out.push_str(&format!(" [{}]", attrs.join(", ")));
        }
        out.push_str(";\n");
    }
    out.push_str("}\n");
    Ok(out)
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Tree read back from DOT, with the numeric attributes of each edge.
#[derive(Debug, Clone)]
pub struct DotTree {
    pub tree: TreeTopology,
    pub attributes: EdgeMap<BTreeMap<String, f64>>,
}

/// Parses the subset of DOT written by [`to_dot`]: one statement per line,
/// node statements `k;` and edge statements `i -- j [name=value, ...];`.
pub fn from_dot(text: &str) -> Result<DotTree> {
    let mut max_label = 0usize;
    let mut edges = Vec::new();
    let mut attributes = EdgeMap::new();
    let mut opened = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim().trim_end_matches(';').trim();
        let bad = |msg: &str| Error::validation("tree", format!("DOT line {}: {msg}", lineno + 1));
        if line.is_empty() || line.starts_with("//") || line == "}" {
            continue;
        }
        if line.ends_with('{') {
            if !line.starts_with("graph") {
                return Err(bad("only undirected `graph` blocks are supported"));
            }
            opened = true;
            continue;
        }
        if !opened {
            return Err(bad("statement outside a graph block"));
        }
        let (stmt, attr_text) = match line.find('[') {
            Some(p) => {
                let close = line.rfind(']').ok_or_else(|| bad("unterminated attribute list"))?;
                (line[..p].trim(), Some(&line[p + 1..close]))
            }
            None => (line, None),
        };
        let label = |s: &str| -> Result<usize> {
            let v: usize = s.trim().trim_matches('"').parse().map_err(|_| bad("node labels must be positive integers"))?;
            if v == 0 {
                return Err(bad("node labels are 1-based"));
            }
            Ok(v)
        };
        if let Some((l, r)) = stmt.split_once("--") {
            let (i, j) = (label(l)?, label(r)?);
            max_label = max_label.max(i).max(j);
            let mut attrs = BTreeMap::new();
            if let Some(list) = attr_text {
                for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let (k, v) = item.split_once('=').ok_or_else(|| bad("attribute without value"))?;
                    let v: f64 = v.trim().trim_matches('"').parse().map_err(|_| bad("non-numeric attribute"))?;
                    attrs.insert(k.trim().to_string(), v);
                }
            }
            edges.push((i - 1, j - 1));
            attributes.insert(Edge::new(i - 1, j - 1), attrs);
        } else {
            max_label = max_label.max(label(stmt)?);
        }
    }
    let tree = TreeTopology::new(max_label, edges)?;
    Ok(DotTree { tree, attributes })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct EdgeRow {
    i: usize,
    j: usize,
    gamma: f64,
    m: f64,
}

/// Writes `i,j,gamma,m` rows in the tree's edge order.
pub fn write_edge_csv<W: Write>(tree: &TreeTopology, gamma: &[f64], m: &[f64], writer: W) -> Result<()> {
    if gamma.len() != tree.edges().len() || m.len() != tree.edges().len() {
        return Err(Error::validation("tree", "gamma and m need one value per edge"));
    }
    let mut w = csv::Writer::from_writer(writer);
    for (idx, e) in tree.edges().iter().enumerate() {
        w.serialize(EdgeRow {
            i: e.a + 1,
            j: e.b + 1,
            gamma: gamma[idx],
            m: m[idx],
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct EdgeTable {
    pub tree: TreeTopology,
    pub gamma: EdgeMap<f64>,
    pub m: EdgeMap<f64>,
}

/// Reads an edge-list CSV; the vertex count is the largest label seen.
pub fn read_edge_csv<R: Read>(reader: R) -> Result<EdgeTable> {
    let mut r = csv::Reader::from_reader(reader);
    let mut pairs = Vec::new();
    let mut gamma = EdgeMap::new();
    let mut m = EdgeMap::new();
    let mut d = 0;
    for row in r.deserialize() {
        let row: EdgeRow = row?;
        if row.i == 0 || row.j == 0 {
            return Err(Error::validation("tree", "edge CSV labels are 1-based"));
        }
        d = d.max(row.i).max(row.j);
        let e = Edge::new(row.i - 1, row.j - 1);
        pairs.push((row.i - 1, row.j - 1));
        gamma.insert(e, row.gamma);
        m.insert(e, row.m);
    }
    let tree = TreeTopology::new(d, pairs)?;
    Ok(EdgeTable { tree, gamma, m })
}
