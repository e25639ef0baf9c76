use crate::error::{Error, Result};
use crate::tree::{EdgeMap, TreeTopology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn of(x: f64) -> Sign {
        if x >= 0.0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Every sign vector in {+,−}^d, in binary counting order (bit i set ⇒ coordinate i negative).
pub fn all_sign_vectors(d: usize) -> impl Iterator<Item = Vec<Sign>> {
    assert!(d < 32, "sign enumeration is limited to d < 32");
    (0u32..(1u32 << d)).map(move |bits| {
        (0..d)
            .map(|i| if bits >> i & 1 == 1 { Sign::Minus } else { Sign::Plus })
            .collect()
    })
}

/// Edge asymmetry parameters m_ij ∈ [0, 1] on a tree. The orthant weight of a
/// sign vector s is m_s = Π_edges m_ij^{1(sᵢsⱼ>0)} (1 − m_ij)^{1(sᵢsⱼ<0)},
/// and the weights over all 2^d orthants sum to 2.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthantWeights {
    tree: TreeTopology,
    m: Vec<f64>,
}

impl OrthantWeights {
    pub fn new(tree: &TreeTopology, m: &EdgeMap<f64>) -> Result<Self> {
        Self::from_values(tree, tree.align(m, "asymmetry m")?)
    }

    /// Values listed in the tree's edge order.
    pub fn from_values(tree: &TreeTopology, m: Vec<f64>) -> Result<Self> {
        if m.len() != tree.edges().len() {
            return Err(Error::validation("measures", "one asymmetry value per tree edge is required"));
        }
        if let Some((e, v)) = tree.edges().iter().zip(&m).find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::validation(
                "measures",
                format!("asymmetry for edge {e} must lie in [0, 1], got {v}"),
            ));
        }
        Ok(Self { tree: tree.clone(), m })
    }

    /// All m_ij = ½: equal mass on every orthant.
    pub fn symmetric(tree: &TreeTopology) -> Self {
        Self {
            tree: tree.clone(),
            m: vec![0.5; tree.edges().len()],
        }
    }

    pub fn tree(&self) -> &TreeTopology {
        &self.tree
    }

    pub fn values(&self) -> &[f64] {
        &self.m
    }

    pub fn is_symmetric(&self) -> bool {
        self.m.iter().all(|&v| v == 0.5)
    }

    pub fn weight(&self, s: &[Sign]) -> Result<f64> {
        if s.len() != self.tree.dim() {
            return Err(Error::validation(
                "measures",
                format!("sign vector has length {}, expected {}", s.len(), self.tree.dim()),
            ));
        }
        Ok(self
            .tree
            .edges()
            .iter()
            .zip(&self.m)
            .map(|(e, &m)| if s[e.a] == s[e.b] { m } else { 1.0 - m })
            .product())
    }

    /// Σ m_s over sign vectors agreeing with `signs` on the sorted `subset`.
    pub fn subset_weight(&self, subset: &[usize], signs: &[Sign]) -> Result<f64> {
        let d = self.tree.dim();
        if subset.len() != signs.len() {
            return Err(Error::validation("measures", "subset and sign lengths differ"));
        }
        let free: Vec<usize> = (0..d).filter(|i| !subset.contains(i)).collect();
        if free.len() > 24 {
            return Err(Error::validation("measures", "too many free coordinates to enumerate"));
        }
        let mut s = vec![Sign::Plus; d];
        for (&i, &sg) in subset.iter().zip(signs) {
            s[i] = sg;
        }
        let mut total = 0.0;
        for bits in 0u32..(1u32 << free.len()) {
            for (b, &i) in free.iter().enumerate() {
                s[i] = if bits >> b & 1 == 1 { Sign::Minus } else { Sign::Plus };
            }
            total += self.weight(&s)?;
        }
        Ok(total)
    }

    /// Mass fraction of the ++ and −− quadrants for the pair (i, j):
    /// ½(1 + Π_{path}(2m − 1)). Equals m_ij when i and j are adjacent.
    pub fn pair_same_sign(&self, i: usize, j: usize) -> f64 {
        let prod: f64 = self
            .tree
            .path(i, j)
            .into_iter()
            .map(|idx| 2.0 * self.m[idx] - 1.0)
            .product();
        0.5 * (1.0 + prod)
    }
}

pub fn orthant_weight(weights: &OrthantWeights, s: &[Sign]) -> Result<f64> {
    weights.weight(s)
}
