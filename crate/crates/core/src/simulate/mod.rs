//! Compound-Poisson approximation of heterogeneous stable Lévy processes.
//!
//! Jumps with standardized sup-norm at least ε are simulated exactly through
//! a Poisson stream of proposals thinned by the rejection step; smaller jumps
//! are replaced by the drift correction γ^(ε).

mod couple;
mod drift;
mod increments;
mod sampler;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::HeterogeneousStableModel;

pub use couple::rank_couple;
pub use drift::{drift_correction, DriftEstimate, MIN_DRIFT_SAMPLES};
pub use increments::{IncrementMatrix, IncrementMetadata, StepKind};
pub use sampler::{sample_truncated_point, AcceptanceStats, TruncatedSampler, STARVATION_LIMIT};

/// Rows simulated per RNG stream.
const BLOCK_ROWS: usize = 64;
/// Stream reserved for the drift Monte Carlo.
const DRIFT_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Truncation level on the standardized scale for unit steps. With
    /// high-frequency steps of length 1/n the level is ε/n, which keeps the
    /// expected number of jumps per row the same.
    pub epsilon: f64,
    pub n_steps: usize,
    pub step_kind: StepKind,
    pub drift_mc_samples: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(epsilon: f64, n_steps: usize, seed: u64) -> Self {
        Self {
            epsilon,
            n_steps,
            step_kind: StepKind::Unit,
            drift_mc_samples: 100_000,
            seed,
        }
    }

    pub fn with_step_kind(mut self, step_kind: StepKind) -> Self {
        self.step_kind = step_kind;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::validation("simulate", format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.n_steps == 0 {
            return Err(Error::validation("simulate", "n_steps must be at least 1"));
        }
        if self.drift_mc_samples < MIN_DRIFT_SAMPLES {
            return Err(Error::validation(
                "simulate",
                format!("drift_mc_samples must be at least {MIN_DRIFT_SAMPLES}"),
            ));
        }
        Ok(())
    }

    /// Step length h.
    pub fn step(&self) -> f64 {
        match self.step_kind {
            StepKind::Unit => 1.0,
            StepKind::HighFrequency => 1.0 / self.n_steps as f64,
        }
    }

    /// Truncation level actually used for jumps and drift.
    pub fn effective_epsilon(&self) -> f64 {
        self.epsilon * self.step()
    }
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub increments: IncrementMatrix,
    pub stats: AcceptanceStats,
    pub drift: DriftEstimate,
}

/// Simulates `cfg.n_steps` i.i.d. increments. Each row is γ^(ε)·h plus the
/// sum of the accepted jumps among Poisson(2d·h/ε) proposals; thinning a
/// Poisson stream keeps it Poisson, so the accepted jumps have exactly rate
/// Λ*(‖y‖∞ ≥ ε)·h without the rate being known in advance.
pub fn simulate_increments(model: &HeterogeneousStableModel, cfg: &SimConfig) -> Result<Simulation> {
    cfg.validate()?;
    let d = model.dim();
    let h = cfg.step();
    let eps = cfg.effective_epsilon();
    let mut drift_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    drift_rng.set_stream(DRIFT_STREAM);
    let drift = drift_correction(model, eps, cfg.drift_mc_samples, &mut drift_rng)?;
    let sampler = TruncatedSampler::new(model)?;
    let margins = model.margins();
    let proposals = Poisson::new(2.0 * d as f64 * h / eps)
        .map_err(|e| Error::validation("simulate", format!("proposal rate: {e}")))?;

    let mut data = vec![0.0; cfg.n_steps * d];
    let stats = data
        .par_chunks_mut(BLOCK_ROWS * d)
        .enumerate()
        .map(|(block, chunk)| -> Result<AcceptanceStats> {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(block as u64);
            let mut stats = AcceptanceStats::default();
            let mut mag = vec![0.0; d];
            let mut signs = vec![0.0; d];
            let mut jump = vec![0.0; d];
            for row in chunk.chunks_mut(d) {
                for (x, g) in row.iter_mut().zip(&drift.gamma_eps) {
                    *x = g * h;
                }
                let count = proposals.sample(&mut rng) as u64;
                stats.proposals += count;
                for _ in 0..count {
                    if !sampler.propose(eps, &mut mag, &mut rng) {
                        continue;
                    }
                    stats.accepted += 1;
                    sampler.signs(&mut signs, &mut rng);
                    for i in 0..d {
                        jump[i] = signs[i] * mag[i];
                    }
                    for i in 0..d {
                        row[i] += margins.coord(i).to_original(jump[i]);
                    }
                }
            }
            Ok(stats)
        })
        .try_reduce(AcceptanceStats::default, |a, b| Ok(a.merge(b)))?;

    let increments = IncrementMatrix::new(cfg.n_steps, d, data)?.with_metadata(IncrementMetadata {
        step_kind: Some(cfg.step_kind),
        seed: Some(cfg.seed),
        epsilon: Some(cfg.epsilon),
        model_hash: None,
    });
    Ok(Simulation {
        increments,
        stats,
        drift,
    })
}
