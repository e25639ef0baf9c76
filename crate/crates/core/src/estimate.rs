//! Rank-based estimation of Lévy correlations, their orthant components,
//! edge asymmetries and Hüsler–Reiss variograms.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::normal;
use crate::simulate::IncrementMatrix;

/// F̂(x) = #{s : data[s] ≤ x} / (n + 1).
pub fn empirical_cdf(column: &[f64], x: f64) -> Result<f64> {
    if column.is_empty() {
        return Err(Error::validation("estimate", "empirical CDF of an empty column"));
    }
    let count = column.iter().filter(|&&v| v <= x).count();
    Ok(count as f64 / (column.len() + 1) as f64)
}

/// (n + 1)·F̂ evaluated at every entry of the column, so tied values share
/// the largest rank of their group.
fn rank_counts(column: &[f64]) -> Vec<u64> {
    let n = column.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| column[a].total_cmp(&column[b]));
    let mut counts = vec![0u64; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && column[order[end]] == column[order[start]] {
            end += 1;
        }
        for &t in &order[start..end] {
            counts[t] = end as u64;
        }
        start = end;
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tail {
    Upper,
    Lower,
    None,
}

/// Classifies every entry of a column: upper when F̂ > 1 − k/(2n), lower
/// when F̂ < k/(2n). Integer arithmetic keeps the comparisons exact.
fn tails(column: &[f64], k: usize) -> Vec<Tail> {
    let n = column.len() as u128;
    let k = k as u128;
    rank_counts(column)
        .into_iter()
        .map(|c| {
            let c = c as u128;
            if 2 * n * c > (2 * n - k) * (n + 1) {
                Tail::Upper
            } else if 2 * n * c < k * (n + 1) {
                Tail::Lower
            } else {
                Tail::None
            }
        })
        .collect()
}

/// Joint-exceedance counts for every pair, split by orthant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthantCounts {
    pub pp: DMatrix<u64>,
    pub pm: DMatrix<u64>,
    pub mp: DMatrix<u64>,
    pub mm: DMatrix<u64>,
}

/// Empirical Lévy correlations with their orthant split. `chi_pm[(i, j)]`
/// counts joint exceedances with coordinate i in its upper tail and j in its
/// lower tail. The diagonal follows the convention χ̂ᵢᵢ = 1, split evenly
/// between the ++ and −− components.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiEstimate {
    pub chi: DMatrix<f64>,
    pub chi_pp: DMatrix<f64>,
    pub chi_pm: DMatrix<f64>,
    pub chi_mp: DMatrix<f64>,
    pub chi_mm: DMatrix<f64>,
    pub counts: OrthantCounts,
    pub k: usize,
    pub n: usize,
}

impl ChiEstimate {
    pub fn dim(&self) -> usize {
        self.chi.nrows()
    }

    /// q = 1 − k/n.
    pub fn q(&self) -> f64 {
        1.0 - self.k as f64 / self.n as f64
    }
}

/// χ̂ = (total joint exceedances)/k. Summing integer counts keeps χ̂ exactly
/// symmetric and equivariant under relabeling; the orthant parts add up to
/// it within rounding.
fn chi_from_counts(counts: &OrthantCounts, k: usize) -> DMatrix<f64> {
    let d = counts.pp.nrows();
    DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            1.0
        } else {
            (counts.pp[(i, j)] + counts.pm[(i, j)] + counts.mp[(i, j)] + counts.mm[(i, j)]) as f64 / k as f64
        }
    })
}

impl ChiEstimate {
    /// Rebuilds an estimate from its four orthant matrices, as written to
    /// disk. Every off-diagonal entry must be a count divided by k.
    pub fn from_orthant_matrices(
        chi_pp: DMatrix<f64>,
        chi_pm: DMatrix<f64>,
        chi_mp: DMatrix<f64>,
        chi_mm: DMatrix<f64>,
        k: usize,
        n: usize,
    ) -> Result<Self> {
        let d = chi_pp.nrows();
        if d < 2 || [&chi_pp, &chi_pm, &chi_mp, &chi_mm].iter().any(|m| m.nrows() != d || m.ncols() != d) {
            return Err(Error::validation("estimate", "orthant matrices must be square and of equal size"));
        }
        if k < 1 || k > n {
            return Err(Error::validation("estimate", format!("k = {k} outside 1..={n}")));
        }
        let kf = k as f64;
        let to_counts = |m: &DMatrix<f64>, name: &str| -> Result<DMatrix<u64>> {
            let mut out = DMatrix::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    if i == j {
                        continue;
                    }
                    let c = (m[(i, j)] * kf).round();
                    if !(c >= 0.0) || c as u64 as f64 / kf != m[(i, j)] {
                        return Err(Error::validation(
                            "estimate",
                            format!("{name}[{}, {}] = {} is not a count over k = {k}", i + 1, j + 1, m[(i, j)]),
                        ));
                    }
                    out[(i, j)] = c as u64;
                }
            }
            Ok(out)
        };
        let counts = OrthantCounts {
            pp: to_counts(&chi_pp, "chi_pp")?,
            pm: to_counts(&chi_pm, "chi_pm")?,
            mp: to_counts(&chi_mp, "chi_mp")?,
            mm: to_counts(&chi_mm, "chi_mm")?,
        };
        let chi = chi_from_counts(&counts, k);
        Ok(Self {
            chi,
            chi_pp,
            chi_pm,
            chi_mp,
            chi_mm,
            counts,
            k,
            n,
        })
    }
}

/// χ̂ᵢⱼ = (1/k) Σ_t 1{|2F̂ᵢ − 1| > 1 − k/n, |2F̂ⱼ − 1| > 1 − k/n}.
pub fn chi_hat(increments: &IncrementMatrix, k: usize) -> Result<ChiEstimate> {
    let (n, d) = (increments.n(), increments.d());
    if d < 2 {
        return Err(Error::validation("estimate", format!("need at least 2 coordinates, got {d}")));
    }
    if k < 1 || k > n {
        return Err(Error::validation("estimate", format!("k = {k} outside 1..={n}")));
    }
    let classes: Vec<Vec<Tail>> = (0..d).map(|j| tails(&increments.column(j), k)).collect();
    let mut counts = OrthantCounts {
        pp: DMatrix::zeros(d, d),
        pm: DMatrix::zeros(d, d),
        mp: DMatrix::zeros(d, d),
        mm: DMatrix::zeros(d, d),
    };
    for i in 0..d {
        for j in (i + 1)..d {
            let (mut pp, mut pm, mut mp, mut mm) = (0u64, 0u64, 0u64, 0u64);
            for (a, b) in classes[i].iter().zip(&classes[j]) {
                match (a, b) {
                    (Tail::Upper, Tail::Upper) => pp += 1,
                    (Tail::Upper, Tail::Lower) => pm += 1,
                    (Tail::Lower, Tail::Upper) => mp += 1,
                    (Tail::Lower, Tail::Lower) => mm += 1,
                    _ => {}
                }
            }
            counts.pp[(i, j)] = pp;
            counts.pp[(j, i)] = pp;
            counts.mm[(i, j)] = mm;
            counts.mm[(j, i)] = mm;
            counts.pm[(i, j)] = pm;
            counts.mp[(j, i)] = pm;
            counts.mp[(i, j)] = mp;
            counts.pm[(j, i)] = mp;
        }
    }
    let kf = k as f64;
    let scale = |c: &DMatrix<u64>| c.map(|v| v as f64 / kf);
    let mut chi_pp = scale(&counts.pp);
    let chi_pm = scale(&counts.pm);
    let chi_mp = scale(&counts.mp);
    let mut chi_mm = scale(&counts.mm);
    for i in 0..d {
        chi_pp[(i, i)] = 0.5;
        chi_mm[(i, i)] = 0.5;
    }
    let chi = chi_from_counts(&counts, k);
    Ok(ChiEstimate {
        chi,
        chi_pp,
        chi_pm,
        chi_mp,
        chi_mm,
        counts,
        k,
        n,
    })
}

/// m̂ᵢⱼ = (χ̂⁺⁺ + χ̂⁻⁻)/χ̂.
pub fn m_hat(est: &ChiEstimate, i: usize, j: usize) -> Result<f64> {
    let d = est.dim();
    if i >= d || j >= d {
        return Err(Error::validation("estimate", format!("pair ({}, {}) out of range", i + 1, j + 1)));
    }
    let chi = est.chi[(i, j)];
    if chi <= 0.0 {
        return Err(Error::domain(
            "estimate",
            format!("m_hat undefined for pair ({}, {}): no joint exceedances", i + 1, j + 1),
        ));
    }
    Ok(((est.chi_pp[(i, j)] + est.chi_mm[(i, j)]) / chi).clamp(0.0, 1.0))
}

/// Γ̂ = (2Φ⁻¹(1 − χ/2))², inverting χ = 2 − 2Φ(√Γ/2). Values above 1 are a
/// finite-sample artifact and are clamped to 1 with a warning.
pub fn gamma_hat_invert(chi: f64) -> Result<f64> {
    if chi.is_nan() || chi <= 0.0 {
        return Err(Error::domain(
            "estimate",
            format!("chi = {chi} gives an infinite variogram value"),
        ));
    }
    let chi = if chi > 1.0 {
        log::warn!("estimate: chi = {chi} exceeds 1, clamping to 1");
        1.0
    } else {
        chi
    };
    let z = 2.0 * normal::quantile(1.0 - 0.5 * chi);
    Ok(z * z)
}
