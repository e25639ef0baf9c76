//! Tree structure learning from empirical Lévy correlations.

mod mst;

use nalgebra::DMatrix;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimate::{chi_hat, gamma_hat_invert, m_hat, ChiEstimate};
use crate::model::HeterogeneousStableModel;
use crate::simulate::{simulate_increments, IncrementMatrix, SimConfig};
use crate::tree::{random_tree, Edge, EdgeMap, TreeTopology};

pub use mst::{max_spanning_tree, minimum_spanning_tree, mst, neg_log_weights, SpanningTree};

/// Tree learned from data with per-edge summaries in the tree's edge order.
#[derive(Debug, Clone)]
pub struct LearnedTree {
    pub tree: TreeTopology,
    pub edge_weights: Vec<f64>,
    pub chi_hat: Vec<f64>,
    pub gamma_hat: Vec<f64>,
    pub m_hat: Vec<f64>,
    /// Whether another spanning tree has the same total weight.
    pub ambiguous: bool,
    pub chi: ChiEstimate,
}

/// Minimum spanning tree of −log χ̂ with Γ̂ and m̂ attached to its edges.
pub fn learn_tree_from_chi(chi: ChiEstimate) -> Result<LearnedTree> {
    let weights = neg_log_weights(&chi.chi);
    let SpanningTree { tree, ambiguous } = minimum_spanning_tree(&weights)?;
    if ambiguous {
        log::warn!("learn: the minimum spanning tree is not unique; ties broken lexicographically");
    }
    let mut edge_weights = Vec::new();
    let mut chis = Vec::new();
    let mut gammas = Vec::new();
    let mut ms = Vec::new();
    for e in tree.edges() {
        let c = chi.chi[(e.a, e.b)];
        edge_weights.push(weights[(e.a, e.b)]);
        chis.push(c);
        gammas.push(gamma_hat_invert(c)?);
        ms.push(m_hat(&chi, e.a, e.b)?);
    }
    Ok(LearnedTree {
        tree,
        edge_weights,
        chi_hat: chis,
        gamma_hat: gammas,
        m_hat: ms,
        ambiguous,
        chi,
    })
}

pub fn learn_tree(increments: &IncrementMatrix, k: usize) -> Result<LearnedTree> {
    learn_tree_from_chi(chi_hat(increments, k)?)
}

/// Tree only, without edge parameters or tie warnings.
fn learn_topology(increments: &IncrementMatrix, k: usize) -> Result<SpanningTree> {
    minimum_spanning_tree(&neg_log_weights(&chi_hat(increments, k)?.chi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityResult {
    /// Symmetric matrix of selection frequencies; the diagonal is zero.
    pub frequencies: DMatrix<f64>,
    /// Subsamples whose spanning tree had a tie.
    pub ambiguous_subsamples: usize,
    pub n_subsamples: usize,
    pub subsample_size: usize,
    pub k_subsample: usize,
}

impl StabilityResult {
    /// Frequencies for all pairs i < j in lexicographic order.
    pub fn edge_frequencies(&self) -> Vec<(Edge, f64)> {
        let d = self.frequencies.nrows();
        let mut out = Vec::new();
        for i in 0..d {
            for j in (i + 1)..d {
                out.push((Edge::new(i, j), self.frequencies[(i, j)]));
            }
        }
        out
    }
}

/// Re-learns the tree on `n_subsamples` subsamples of size ⌈n/2⌉ drawn
/// without replacement and reports how often each pair is selected. The
/// exceedance count is scaled with the sample, k_sub = max(1, round(k·m/n)).
pub fn subsample_stability(
    increments: &IncrementMatrix,
    k: usize,
    n_subsamples: usize,
    seed: u64,
) -> Result<StabilityResult> {
    let (n, d) = (increments.n(), increments.d());
    if n < 4 {
        return Err(Error::validation("learn", format!("subsampling needs n >= 4, got {n}")));
    }
    if n_subsamples == 0 {
        return Err(Error::validation("learn", "at least one subsample is required"));
    }
    if k < 1 || k > n {
        return Err(Error::validation("learn", format!("k = {k} outside 1..={n}")));
    }
    let m = n.div_ceil(2);
    let k_sub = ((k as f64 * m as f64 / n as f64).round() as usize).clamp(1, m);
    let trees = (0..n_subsamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let mut rows = index::sample(&mut rng, n, m).into_vec();
            rows.sort_unstable();
            learn_topology(&increments.select_rows(&rows)?, k_sub)
        })
        .collect::<Result<Vec<_>>>()?;
    let ambiguous_subsamples = trees.iter().filter(|t| t.ambiguous).count();
    if ambiguous_subsamples > 0 {
        log::warn!(
            "learn: {ambiguous_subsamples} of {n_subsamples} subsample trees were not unique; ties broken lexicographically"
        );
    }
    let mut frequencies = DMatrix::zeros(d, d);
    for SpanningTree { tree: t, .. } in &trees {
        for e in t.edges() {
            frequencies[(e.a, e.b)] += 1.0;
            frequencies[(e.b, e.a)] += 1.0;
        }
    }
    frequencies /= n_subsamples as f64;
    Ok(StabilityResult {
        frequencies,
        ambiguous_subsamples,
        n_subsamples,
        subsample_size: m,
        k_subsample: k_sub,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub d: usize,
    pub n_grid: Vec<usize>,
    pub q_grid: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub epsilon: f64,
    /// Edge values are drawn uniformly from this range.
    pub gamma_range: (f64, f64),
}

impl StudyConfig {
    pub fn new(d: usize, n_grid: Vec<usize>, q_grid: Vec<f64>, reps: usize, seed: u64) -> Self {
        Self {
            d,
            n_grid,
            q_grid,
            reps,
            seed,
            epsilon: 0.01,
            gamma_range: (1.0, 6.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryRow {
    pub n: usize,
    pub q: f64,
    pub proportion: f64,
}

/// k = round((1 − q)·n), kept within 1..=n.
pub fn k_from_q(n: usize, q: f64) -> usize {
    (((1.0 - q) * n as f64).round() as usize).clamp(1, n)
}

/// Proportion of replications in which the learned tree equals the true one,
/// for every (n, q) cell. Each replication draws a uniform random tree, edge
/// values Γ ~ Unif[gamma_range], simulates the symmetric Hüsler–Reiss tree
/// model with 1-stable margins once at the largest n and learns on prefixes.
pub fn recovery_study(cfg: &StudyConfig) -> Result<Vec<RecoveryRow>> {
    if cfg.d < 2 {
        return Err(Error::validation("learn", "the study needs d >= 2"));
    }
    if cfg.n_grid.is_empty() || cfg.q_grid.is_empty() || cfg.reps == 0 {
        return Err(Error::validation("learn", "n_grid, q_grid and reps must be nonempty"));
    }
    if cfg.n_grid.contains(&0) {
        return Err(Error::validation("learn", "sample sizes must be positive"));
    }
    if let Some(q) = cfg.q_grid.iter().find(|q| !(**q >= 0.0 && **q < 1.0)) {
        return Err(Error::validation("learn", format!("q = {q} outside [0, 1)")));
    }
    let (lo, hi) = cfg.gamma_range;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::validation("learn", "gamma range must satisfy 0 < lo <= hi"));
    }
    let n_max = *cfg.n_grid.iter().max().expect("nonempty");
    let hits = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| -> Result<Vec<bool>> {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(rep as u64);
            let tree = random_tree(cfg.d, &mut rng)?;
            let gammas: EdgeMap<f64> = tree
                .edges()
                .iter()
                .map(|&e| (e, if hi > lo { rng.random_range(lo..hi) } else { lo }))
                .collect();
            let model = HeterogeneousStableModel::symmetric_hr_tree(tree.clone(), &gammas)?;
            let sim = simulate_increments(&model, &SimConfig::new(cfg.epsilon, n_max, rng.random()))?;
            let mut out = Vec::with_capacity(cfg.n_grid.len() * cfg.q_grid.len());
            for &n in &cfg.n_grid {
                let data = sim.increments.prefix(n)?;
                for &q in &cfg.q_grid {
                    let found = match learn_topology(&data, k_from_q(n, q)) {
                        Ok(l) => l.tree == tree,
                        // There is one labeled tree on two vertices, even when
                        // no joint exceedance was observed.
                        Err(_) if cfg.d == 2 => true,
                        // Otherwise a disconnected χ̂ graph is a failed recovery.
                        Err(Error::Numerical { .. }) | Err(Error::Domain { .. }) => false,
                        Err(e) => return Err(e),
                    };
                    out.push(found);
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (a, &n) in cfg.n_grid.iter().enumerate() {
        for (b, &q) in cfg.q_grid.iter().enumerate() {
            let cell = a * cfg.q_grid.len() + b;
            let count = hits.iter().filter(|h| h[cell]).count();
            rows.push(RecoveryRow {
                n,
                q,
                proportion: count as f64 / cfg.reps as f64,
            });
        }
    }
    Ok(rows)
}
