//! Linear SVM trained by primal stochastic sub-gradient descent (Pegasos).
//!
//! The bias is handled as one extra always-one input, so it is regularized
//! together with the weights. The returned model is the running average of
//! every iterate, which is far less noisy than the last iterate.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmConfig {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            lambda: 1e-4,
            epochs: 20,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Regularized hinge objective of the averaged iterate after each epoch.
    pub objective_trace: Vec<f64>,
}

impl LinearSvm {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    /// λ/2‖(w, b)‖² + mean hinge loss.
    pub fn objective(&self, xs: &[Vec<f64>], ys: &[bool], lambda: f64) -> f64 {
        let norm2 = self.weights.iter().map(|w| w * w).sum::<f64>() + self.bias * self.bias;
        let hinge: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, &y)| (1.0 - sign(y) * self.decision(x)).max(0.0))
            .sum();
        0.5 * lambda * norm2 + hinge / xs.len() as f64
    }
}

fn sign(y: bool) -> f64 {
    if y {
        1.0
    } else {
        -1.0
    }
}

/// One Pegasos update at step `t` (1-based) on example (x, y). The weights
/// shrink by (1 − ηλ); the hinge term contributes only when the margin is
/// below 1. Returns whether the hinge term was active.
pub fn pegasos_step(model: &mut LinearSvm, x: &[f64], y: bool, t: usize, lambda: f64) -> bool {
    let eta = 1.0 / (lambda * t as f64);
    let margin = sign(y) * model.decision(x);
    let shrink = 1.0 - eta * lambda;
    for w in &mut model.weights {
        *w *= shrink;
    }
    model.bias *= shrink;
    let active = margin < 1.0;
    if active {
        let step = eta * sign(y);
        for (w, v) in model.weights.iter_mut().zip(x) {
            *w += step * v;
        }
        model.bias += step;
    }
    // Project onto the ball of radius 1/√λ that contains the optimum.
    let norm = (model.weights.iter().map(|w| w * w).sum::<f64>() + model.bias * model.bias).sqrt();
    let radius = 1.0 / lambda.sqrt();
    if norm > radius {
        let scale = radius / norm;
        for w in &mut model.weights {
            *w *= scale;
        }
        model.bias *= scale;
    }
    active
}

pub fn train_svm(xs: &[Vec<f64>], ys: &[bool], config: &SvmConfig) -> Result<LinearSvm> {
    super::check_training_set(xs, ys)?;
    if !ys.iter().any(|&y| y) || ys.iter().all(|&y| y) {
        return Err(Error::SingleClass("SVM training needs both classes"));
    }
    if !(config.lambda > 0.0) || config.epochs == 0 {
        return Err(Error::Parameter("SVM needs lambda > 0 and at least one epoch".into()));
    }
    let d = xs[0].len();
    let mut model = LinearSvm {
        weights: vec![0.0; d],
        bias: 0.0,
        objective_trace: Vec::with_capacity(config.epochs),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut average = model.clone();
    let mut t = 0;
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            pegasos_step(&mut model, &xs[i], ys[i], t, config.lambda);
            let keep = (t - 1) as f64 / t as f64;
            for (a, w) in average.weights.iter_mut().zip(&model.weights) {
                *a = keep * *a + w / t as f64;
            }
            average.bias = keep * average.bias + model.bias / t as f64;
        }
        let objective = average.objective(xs, ys, config.lambda);
        if !objective.is_finite() {
            return Err(Error::TrainingDiverged { epoch });
        }
        average.objective_trace.push(objective);
    }
    Ok(average)
}
