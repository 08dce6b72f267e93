//! Exact t-SNE: gradient descent on KL(P‖Q) with Student-t low-dimensional
//! affinities, early exaggeration, momentum and per-coordinate gains.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::affinity::{conditional_affinities, symmetrize, JointMatrix};
use crate::error::{Error, Result};

/// Floor applied to probabilities inside the KL logarithm.
pub const PROBABILITY_FLOOR: f64 = 1e-12;
const MIN_GAIN: f64 = 0.01;
const INIT_STD: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    pub initial_momentum: f64,
    pub final_momentum: f64,
    /// Iteration at which momentum switches to `final_momentum`.
    pub momentum_switch: usize,
    pub exaggeration: f64,
    /// Number of leading iterations that use the exaggerated P.
    pub exaggeration_iterations: usize,
    /// Record the KL divergence every this many iterations.
    pub kl_interval: usize,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        TsneConfig {
            perplexity: 30.0,
            iterations: 1000,
            learning_rate: 200.0,
            initial_momentum: 0.5,
            final_momentum: 0.8,
            momentum_switch: 250,
            exaggeration: 12.0,
            exaggeration_iterations: 250,
            kl_interval: 50,
            seed: 1,
        }
    }
}

impl TsneConfig {
    /// Perplexity actually used for `n` points: the configured value, capped
    /// at (n − 1)/3.
    pub fn effective_perplexity(&self, n: usize) -> f64 {
        self.perplexity.min((n as f64 - 1.0) / 3.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Parameter("t-SNE iterations must be positive".into()));
        }
        if !(self.perplexity >= 1.0) {
            return Err(Error::Parameter("perplexity must be ≥ 1".into()));
        }
        if !(self.learning_rate > 0.0) || !(self.exaggeration >= 1.0) {
            return Err(Error::Parameter(
                "learning rate must be positive and exaggeration ≥ 1".into(),
            ));
        }
        if self.kl_interval == 0 {
            return Err(Error::Parameter("kl_interval must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding2D {
    pub points: Vec<[f64; 2]>,
    /// KL(P‖Q) after the final update.
    pub kl: f64,
    /// KL(P‖Q) at the last exaggerated iteration, if any ran.
    pub kl_after_exaggeration: Option<f64>,
    /// (iteration, KL) samples, always including iteration 0.
    pub kl_trace: Vec<(usize, f64)>,
    pub perplexity: f64,
}

/// Student-t kernel row sums and the normalizer Z = Σ_{i≠j} w_ij.
fn kernel_total(y: &[[f64; 2]]) -> f64 {
    let partial: Vec<f64> = (0..y.len())
        .into_par_iter()
        .map(|i| {
            y.iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, yj)| kernel(&y[i], yj))
                .sum()
        })
        .collect();
    partial.iter().sum()
}

fn kernel(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    1.0 / (1.0 + dx * dx + dy * dy)
}

/// KL(P‖Q) for the current layout.
pub fn kl_divergence(p: &JointMatrix, y: &[[f64; 2]]) -> f64 {
    let z = kernel_total(y);
    let partial: Vec<f64> = (0..y.len())
        .into_par_iter()
        .map(|i| {
            let row = p.row(i);
            let mut acc = 0.0;
            for (j, &pij) in row.iter().enumerate() {
                if j != i && pij > 0.0 {
                    let q = kernel(&y[i], &y[j]) / z;
                    acc += pij * (pij.max(PROBABILITY_FLOOR) / q.max(PROBABILITY_FLOOR)).ln();
                }
            }
            acc
        })
        .collect();
    partial.iter().sum()
}

/// Exact gradient ∂KL/∂yᵢ = 4 Σⱼ (α·p_ij − q_ij) w_ij (yᵢ − yⱼ), with α the
/// exaggeration factor applied to P.
pub fn kl_gradient(p: &JointMatrix, y: &[[f64; 2]], exaggeration: f64) -> Vec<[f64; 2]> {
    let z = kernel_total(y);
    (0..y.len())
        .into_par_iter()
        .map(|i| {
            let row = p.row(i);
            let mut g = [0.0; 2];
            for (j, yj) in y.iter().enumerate() {
                if j == i {
                    continue;
                }
                let w = kernel(&y[i], yj);
                let coef = 4.0 * (exaggeration * row[j] - w / z) * w;
                g[0] += coef * (y[i][0] - yj[0]);
                g[1] += coef * (y[i][1] - yj[1]);
            }
            g
        })
        .collect()
}

/// Reduce `points` to two dimensions.
pub fn tsne(points: &[Vec<f64>], config: &TsneConfig) -> Result<Embedding2D> {
    config.validate()?;
    let n = points.len();
    if n < 4 {
        return Err(Error::Parameter(format!("t-SNE needs at least 4 points, got {n}")));
    }
    let perplexity = config.effective_perplexity(n);
    if perplexity < config.perplexity {
        log::info!("perplexity reduced from {} to {perplexity:.3} for {n} points", config.perplexity);
    }
    let p = symmetrize(conditional_affinities(points, perplexity)?);
    tsne_from_joint(&p, config, perplexity)
}

/// Optimise a layout for an already computed joint matrix.
pub fn tsne_from_joint(p: &JointMatrix, config: &TsneConfig, perplexity: f64) -> Result<Embedding2D> {
    let n = p.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let normal = Normal::new(0.0, INIT_STD).expect("valid normal");
    let mut y: Vec<[f64; 2]> = (0..n)
        .map(|_| [normal.sample(&mut rng), normal.sample(&mut rng)])
        .collect();
    let mut velocity = vec![[0.0f64; 2]; n];
    let mut gains = vec![[1.0f64; 2]; n];
    let mut kl_trace = Vec::new();
    let mut kl_after_exaggeration = None;

    for iteration in 0..config.iterations {
        let exaggerated = iteration < config.exaggeration_iterations;
        let alpha = if exaggerated { config.exaggeration } else { 1.0 };
        let momentum = if iteration < config.momentum_switch {
            config.initial_momentum
        } else {
            config.final_momentum
        };
        let grad = kl_gradient(p, &y, alpha);
        if grad.iter().flatten().any(|g| !g.is_finite()) {
            return Err(Error::TsneDiverged { iteration });
        }
        for i in 0..n {
            for k in 0..2 {
                let same_sign = (grad[i][k] > 0.0) == (velocity[i][k] > 0.0);
                gains[i][k] = if same_sign {
                    (gains[i][k] * 0.8).max(MIN_GAIN)
                } else {
                    gains[i][k] + 0.2
                };
                velocity[i][k] =
                    momentum * velocity[i][k] - config.learning_rate * gains[i][k] * grad[i][k];
                y[i][k] += velocity[i][k];
            }
        }
        recenter(&mut y);

        let last_exaggerated = exaggerated && iteration + 1 == config.exaggeration_iterations;
        if iteration % config.kl_interval == 0 || last_exaggerated {
            let kl = kl_divergence(p, &y);
            if !kl.is_finite() {
                return Err(Error::TsneDiverged { iteration });
            }
            if iteration % config.kl_interval == 0 {
                kl_trace.push((iteration, kl));
            }
            if last_exaggerated {
                kl_after_exaggeration = Some(kl);
            }
        }
    }
    let kl = kl_divergence(p, &y);
    if !kl.is_finite() || y.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::TsneDiverged {
            iteration: config.iterations,
        });
    }
    kl_trace.push((config.iterations, kl));
    Ok(Embedding2D {
        points: y,
        kl,
        kl_after_exaggeration,
        kl_trace,
        perplexity,
    })
}

fn recenter(y: &mut [[f64; 2]]) {
    let n = y.len() as f64;
    let mean = y
        .iter()
        .fold([0.0, 0.0], |acc, p| [acc[0] + p[0], acc[1] + p[1]]);
    for p in y.iter_mut() {
        p[0] -= mean[0] / n;
        p[1] -= mean[1] / n;
    }
}
