use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One coordinate's stable tail: U(x) = c⁺x^(−α) for x > 0 and
/// U(−x) = c⁻x^(−α) for x > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginCoord {
    pub alpha: f64,
    pub c_plus: f64,
    pub c_minus: f64,
}

impl MarginCoord {
    pub fn new(alpha: f64, c_plus: f64, c_minus: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::validation("measures", format!("alpha must lie in (0, 2), got {alpha}")));
        }
        if !(c_plus > 0.0 && c_plus.is_finite()) || !(c_minus > 0.0 && c_minus.is_finite()) {
            return Err(Error::validation("measures", "tail coefficients must be positive and finite"));
        }
        Ok(Self {
            alpha,
            c_plus,
            c_minus,
        })
    }

    pub fn standard() -> Self {
        Self {
            alpha: 1.0,
            c_plus: 1.0,
            c_minus: 1.0,
        }
    }

    /// Marginal tail function U at `x` (x ≠ 0).
    pub fn tail(&self, x: f64) -> f64 {
        if x >= 0.0 {
            self.c_plus * x.powf(-self.alpha)
        } else {
            self.c_minus * (-x).powf(-self.alpha)
        }
    }

    /// Map from the standardized scale (tails 1/x) to the original margin.
    pub fn to_original(&self, z: f64) -> f64 {
        let inv = 1.0 / self.alpha;
        if z >= 0.0 {
            (self.c_plus * z).powf(inv)
        } else {
            -(-self.c_minus * z).powf(inv)
        }
    }

    /// Inverse of [`MarginCoord::to_original`].
    pub fn to_standardized(&self, x: f64) -> f64 {
        if x >= 0.0 {
            x.powf(self.alpha) / self.c_plus
        } else {
            -(-x).powf(self.alpha) / self.c_minus
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.c_plus == self.c_minus
    }
}

pub fn std_to_original(z: f64, margin: &MarginCoord) -> f64 {
    margin.to_original(z)
}

/// Per-coordinate stable tails of a heterogeneous stable model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalSpec {
    coords: Vec<MarginCoord>,
}

impl MarginalSpec {
    pub fn new(alpha: &[f64], c_plus: &[f64], c_minus: &[f64]) -> Result<Self> {
        if alpha.len() != c_plus.len() || alpha.len() != c_minus.len() {
            return Err(Error::validation("measures", "alpha, c_plus and c_minus lengths differ"));
        }
        let coords = alpha
            .iter()
            .zip(c_plus)
            .zip(c_minus)
            .enumerate()
            .map(|(i, ((&a, &cp), &cm))| {
                MarginCoord::new(a, cp, cm).map_err(|e| Error::validation("measures", format!("margin {}: {e}", i + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { coords })
    }

    /// α = 1, c± = 1 on every coordinate: the standardized process itself.
    pub fn standard(d: usize) -> Self {
        Self {
            coords: vec![MarginCoord::standard(); d],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coord(&self, i: usize) -> &MarginCoord {
        &self.coords[i]
    }

    pub fn coords(&self) -> &[MarginCoord] {
        &self.coords
    }

    pub fn to_original_into(&self, z: &[f64], out: &mut [f64]) {
        for ((o, &v), m) in out.iter_mut().zip(z).zip(&self.coords) {
            *o = m.to_original(v);
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.coords.iter().all(MarginCoord::is_symmetric)
    }
}
