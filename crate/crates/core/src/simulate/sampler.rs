//! Rejection sampler for the ε-truncated standardized measure.
//!
//! A proposal picks an anchor j uniformly, a radius r = ε/U with U uniform on
//! (0, 1], and the extremal function W at j (W_j = 1). The point r·W then has
//! law proportional to Σ_j 1{y_j > ε} Λ*₊(dy), so accepting with probability
//! 1/#{k : y_k ≥ ε} leaves Λ*₊ restricted to {‖y‖∞ ≥ ε}. Signs are drawn
//! independently along the tree.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{Dependence, HeterogeneousStableModel};
use crate::tree::BivariateFamily;

/// Consecutive rejections after which sampling gives up.
pub const STARVATION_LIMIT: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AcceptanceStats {
    pub proposals: u64,
    pub accepted: u64,
}

impl AcceptanceStats {
    pub fn merge(self, other: Self) -> Self {
        Self {
            proposals: self.proposals + other.proposals,
            accepted: self.accepted + other.accepted,
        }
    }

    pub fn p_hat(&self) -> f64 {
        if self.proposals == 0 {
            return f64::NAN;
        }
        self.accepted as f64 / self.proposals as f64
    }

    /// Estimate of Λ*(‖y‖∞ ≥ ε) and its standard error. Each proposal
    /// carries mass d/ε on the positive orthant and the orthant weights sum
    /// to 2, so the estimate is (2d/ε)·p̂.
    pub fn rate_estimate(&self, d: usize, epsilon: f64) -> (f64, f64) {
        let p = self.p_hat();
        let scale = 2.0 * d as f64 / epsilon;
        let se = (p * (1.0 - p) / self.proposals as f64).sqrt();
        (scale * p, scale * se)
    }
}

#[derive(Debug, Clone)]
enum Spectral {
    /// log W over the non-anchor coordinates is Gaussian; one Cholesky
    /// factor per anchor.
    Gaussian {
        others: Vec<Vec<usize>>,
        means: Vec<Vec<f64>>,
        factors: Vec<DMatrix<f64>>,
    },
    /// Multiplicative walk away from the anchor along tree edges.
    Walk {
        orders: Vec<Vec<(usize, usize, usize)>>,
        edges: Vec<EdgeRatio>,
    },
}

#[derive(Debug, Clone)]
enum EdgeRatio {
    LogNormal { mean: f64, sd: f64 },
    /// (E/G)^{1/θ} with E ~ Exp(1), G ~ Gamma(1 + 1/θ, 1).
    Clayton { inv_theta: f64, gamma: Gamma<f64> },
    Zero,
}

impl EdgeRatio {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            EdgeRatio::LogNormal { mean, sd } => {
                let z: f64 = StandardNormal.sample(rng);
                (mean + sd * z).exp()
            }
            EdgeRatio::Clayton { inv_theta, gamma } => {
                let e = -(1.0 - rng.random::<f64>()).ln();
                let g = gamma.sample(rng);
                (e / g).powf(*inv_theta)
            }
            EdgeRatio::Zero => 0.0,
        }
    }
}

/// Proposal machinery for one model, reusable across threads.
#[derive(Debug, Clone)]
pub struct TruncatedSampler {
    d: usize,
    spectral: Spectral,
    sign_order: Vec<(usize, usize, usize)>,
    m: Vec<f64>,
    family: &'static str,
}

impl TruncatedSampler {
    pub fn new(model: &HeterogeneousStableModel) -> Result<Self> {
        let d = model.dim();
        let tree = model.tree();
        let spectral = match model.dependence() {
            Dependence::HuslerReiss(hr) => {
                let mut others = Vec::with_capacity(d);
                let mut means = Vec::with_capacity(d);
                let mut factors = Vec::with_capacity(d);
                for j in 0..d {
                    let (o, mean, cov) = hr.extremal_gaussian(j);
                    let factor = if o.is_empty() { DMatrix::zeros(0, 0) } else { linalg::cholesky(&cov, "simulate")? };
                    others.push(o);
                    means.push(mean.iter().copied().collect());
                    factors.push(factor);
                }
                Spectral::Gaussian { others, means, factors }
            }
            Dependence::EdgeWise(families) => {
                let edges = families
                    .iter()
                    .map(|f| match f {
                        BivariateFamily::HuslerReiss { gamma } => Ok(EdgeRatio::LogNormal {
                            mean: -0.5 * gamma,
                            sd: gamma.sqrt(),
                        }),
                        BivariateFamily::Clayton(c) => Ok(EdgeRatio::Clayton {
                            inv_theta: 1.0 / c.theta(),
                            gamma: Gamma::new(1.0 + 1.0 / c.theta(), 1.0)
                                .map_err(|e| Error::validation("simulate", e.to_string()))?,
                        }),
                        BivariateFamily::Independence => Ok(EdgeRatio::Zero),
                    })
                    .collect::<Result<Vec<_>>>()?;
                let orders = (0..d).map(|j| tree.bfs_from(j)).collect();
                Spectral::Walk { orders, edges }
            }
        };
        let family = match model.family() {
            Some(f) => f.name(),
            None => "mixed",
        };
        Ok(Self {
            d,
            spectral,
            sign_order: tree.bfs_from(0),
            m: model.weights().values().to_vec(),
            family,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Draws the extremal function anchored at `j` into `w`.
    fn spectral<R: Rng + ?Sized>(&self, j: usize, w: &mut [f64], rng: &mut R) {
        w[j] = 1.0;
        match &self.spectral {
            Spectral::Gaussian { others, means, factors } => {
                let o = &others[j];
                let k = o.len();
                let mut z = [0.0f64; 64];
                let mut zv = Vec::new();
                let z: &mut [f64] = if k <= 64 {
                    &mut z[..k]
                } else {
                    zv.resize(k, 0.0);
                    &mut zv
                };
                for v in z.iter_mut() {
                    *v = StandardNormal.sample(rng);
                }
                let l = &factors[j];
                for a in 0..k {
                    let mut s = means[j][a];
                    for b in 0..=a {
                        s += l[(a, b)] * z[b];
                    }
                    w[o[a]] = s.exp();
                }
            }
            Spectral::Walk { orders, edges } => {
                for &(child, parent, idx) in &orders[j] {
                    w[child] = if w[parent] == 0.0 { 0.0 } else { w[parent] * edges[idx].sample(rng) };
                }
            }
        }
    }

    /// One proposal. Writes the magnitude vector r·W into `mag` and returns
    /// whether it was accepted.
    pub fn propose<R: Rng + ?Sized>(&self, epsilon: f64, mag: &mut [f64], rng: &mut R) -> bool {
        let j = rng.random_range(0..self.d);
        let u = 1.0 - rng.random::<f64>();
        self.spectral(j, mag, rng);
        let hits = mag.iter().filter(|&&w| w >= u).count();
        let r = epsilon / u;
        for v in mag.iter_mut() {
            *v *= r;
        }
        hits == 1 || rng.random::<f64>() * (hits as f64) < 1.0
    }

    /// Draws the sign vector: a fair coin at vertex 1, then each child keeps
    /// its parent's sign with probability m of the connecting edge.
    pub fn signs<R: Rng + ?Sized>(&self, out: &mut [f64], rng: &mut R) {
        out[0] = if rng.random::<bool>() { 1.0 } else { -1.0 };
        for &(child, parent, idx) in &self.sign_order {
            let keep = rng.random::<f64>() < self.m[idx];
            out[child] = if keep { out[parent] } else { -out[parent] };
        }
    }

    /// Draws one accepted signed point; `stats` accumulates the proposals.
    pub fn sample_into<R: Rng + ?Sized>(
        &self,
        epsilon: f64,
        point: &mut [f64],
        signs: &mut [f64],
        stats: &mut AcceptanceStats,
        rng: &mut R,
    ) -> Result<()> {
        let mut streak = 0u64;
        loop {
            stats.proposals += 1;
            if self.propose(epsilon, point, rng) {
                stats.accepted += 1;
                break;
            }
            streak += 1;
            if streak >= STARVATION_LIMIT {
                return Err(Error::numerical(
                    "simulate",
                    format!(
                        "acceptance starvation: {STARVATION_LIMIT} consecutive rejections at epsilon = {epsilon} for the {} family",
                        self.family
                    ),
                ));
            }
        }
        self.signs(signs, rng);
        for (p, s) in point.iter_mut().zip(signs.iter()) {
            *p *= s;
        }
        Ok(())
    }
}

/// One point of the standardized measure restricted to {‖y‖∞ ≥ ε} and
/// normalized, with the proposal counts used to get it.
pub fn sample_truncated_point<R: Rng + ?Sized>(
    model: &HeterogeneousStableModel,
    epsilon: f64,
    rng: &mut R,
) -> Result<(Vec<f64>, AcceptanceStats)> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::validation("simulate", format!("epsilon must be positive, got {epsilon}")));
    }
    let sampler = TruncatedSampler::new(model)?;
    let d = model.dim();
    let mut point = vec![0.0; d];
    let mut signs = vec![0.0; d];
    let mut stats = AcceptanceStats::default();
    sampler.sample_into(epsilon, &mut point, &mut signs, &mut stats, rng)?;
    Ok((point, stats))
}
