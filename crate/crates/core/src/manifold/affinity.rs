//! Perplexity-calibrated Gaussian neighbour probabilities and their
//! symmetrized joint form.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Row perplexity must match the target within this tolerance.
pub const PERPLEXITY_TOLERANCE: f64 = 1e-4;
/// Bisection steps allowed per row.
pub const MAX_BISECTION_STEPS: usize = 50;

const LOG_BETA_RANGE: (f64, f64) = (-40.0, 40.0);

/// Row-stochastic matrix of conditional neighbour probabilities P(j|i).
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix {
    n: usize,
    /// Row-major n×n.
    p: Vec<f64>,
    /// Gaussian bandwidth of each row, in the units of the input points.
    pub sigmas: Vec<f64>,
    pub target_perplexity: f64,
    /// Rows whose points coincide with every other point; these are uniform.
    pub degenerate_rows: Vec<usize>,
}

impl AffinityMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.p[i * self.n..(i + 1) * self.n]
    }

    /// 2^H of row `i`, with H the Shannon entropy in bits.
    pub fn row_perplexity(&self, i: usize) -> f64 {
        perplexity_of(self.row(i))
    }
}

pub(crate) fn perplexity_of(row: &[f64]) -> f64 {
    let h: f64 = row
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    h.exp2()
}

/// Pairwise squared Euclidean distances, row-major n×n.
pub fn squared_distances(points: &[Vec<f64>]) -> Vec<f64> {
    let n = points.len();
    let mut d = vec![0.0; n * n];
    d.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
        for (j, out) in row.iter_mut().enumerate() {
            *out = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
        }
    });
    d
}

struct RowFit {
    probabilities: Vec<f64>,
    beta: f64,
    degenerate: bool,
}

/// Fill `out` with exp(−beta·shifted) normalized over j ≠ i, returning the
/// perplexity of the result.
fn gaussian_row(shifted: &[f64], i: usize, beta: f64, out: &mut [f64]) -> f64 {
    let mut total = 0.0;
    for (j, (o, &d)) in out.iter_mut().zip(shifted).enumerate() {
        *o = if j == i { 0.0 } else { (-beta * d).exp() };
        total += *o;
    }
    for o in out.iter_mut() {
        *o /= total;
    }
    perplexity_of(out)
}

/// Calibrate one row. Distances are shifted by the row minimum and scaled to
/// [0, 1] so one fixed search interval on ln β suits every row.
fn fit_row(distances: &[f64], i: usize, target: f64) -> RowFit {
    let n = distances.len();
    let others = || distances.iter().enumerate().filter(move |&(j, _)| j != i).map(|(_, &d)| d);
    let min = others().fold(f64::INFINITY, f64::min);
    let max = others().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    let mut probabilities = vec![0.0; n];
    if !(range > 0.0) {
        gaussian_row(&vec![0.0; n], i, 0.0, &mut probabilities);
        return RowFit {
            probabilities,
            beta: 0.0,
            degenerate: max == 0.0,
        };
    }
    let shifted: Vec<f64> = distances.iter().map(|&d| ((d - min) / range).max(0.0)).collect();
    let (mut lo, mut hi) = LOG_BETA_RANGE;
    let mut best = (f64::INFINITY, 0.0);
    for _ in 0..MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let perplexity = gaussian_row(&shifted, i, mid.exp(), &mut probabilities);
        let error = (perplexity - target).abs();
        if error < best.0 {
            best = (error, mid);
        }
        if error < PERPLEXITY_TOLERANCE {
            break;
        }
        // Larger β concentrates mass and lowers perplexity.
        if perplexity > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let scaled_beta = best.1.exp();
    gaussian_row(&shifted, i, scaled_beta, &mut probabilities);
    RowFit {
        probabilities,
        beta: scaled_beta / range,
        degenerate: false,
    }
}

/// Conditional probabilities P(j|i) ∝ exp(−‖xᵢ − xⱼ‖² / 2σᵢ²), with each σᵢ
/// found by bisection so the row perplexity matches `perplexity`.
pub fn conditional_affinities(points: &[Vec<f64>], perplexity: f64) -> Result<AffinityMatrix> {
    let n = points.len();
    if n < 2 {
        return Err(Error::Parameter(format!("need at least 2 points, got {n}")));
    }
    if !(perplexity >= 1.0 && perplexity < n as f64) {
        return Err(Error::Parameter(format!(
            "perplexity must lie in [1, {n}), got {perplexity}"
        )));
    }
    let d = points[0].len();
    if let Some(bad) = points.iter().find(|p| p.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: bad.len(),
        });
    }
    let distances = squared_distances(points);
    let fits: Vec<RowFit> = (0..n)
        .into_par_iter()
        .map(|i| fit_row(&distances[i * n..(i + 1) * n], i, perplexity))
        .collect();

    let mut p = Vec::with_capacity(n * n);
    let mut sigmas = Vec::with_capacity(n);
    let mut degenerate_rows = Vec::new();
    for (i, fit) in fits.into_iter().enumerate() {
        if fit.degenerate {
            log::warn!("point {i} coincides with every other point; using a uniform row");
            degenerate_rows.push(i);
        }
        p.extend(fit.probabilities);
        sigmas.push(if fit.beta > 0.0 {
            (1.0 / (2.0 * fit.beta)).sqrt()
        } else {
            f64::INFINITY
        });
    }
    Ok(AffinityMatrix {
        n,
        p,
        sigmas,
        target_perplexity: perplexity,
        degenerate_rows,
    })
}

/// Symmetric joint probabilities p_ij = (P(j|i) + P(i|j)) / 2n.
#[derive(Debug, Clone, PartialEq)]
pub struct JointMatrix {
    n: usize,
    p: Vec<f64>,
}

impl JointMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.p[i * self.n..(i + 1) * self.n]
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }
}

pub fn symmetrize(conditional: AffinityMatrix) -> JointMatrix {
    let n = conditional.n;
    let mut p = conditional.p;
    let scale = 2.0 * n as f64;
    for i in 0..n {
        p[i * n + i] = 0.0;
        for j in i + 1..n {
            let v = (p[i * n + j] + p[j * n + i]) / scale;
            p[i * n + j] = v;
            p[j * n + i] = v;
        }
    }
    JointMatrix { n, p }
}
