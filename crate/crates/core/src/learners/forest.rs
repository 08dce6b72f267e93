//! Random forest of CART trees with bootstrap rows and per-split feature
//! subsets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow_tree, DecisionTree, FeatureSampler, TreeConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Features examined per split; `None` means ⌊√d⌋ (at least 1).
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
    pub tree: TreeConfig,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            features_per_split: None,
            bootstrap: true,
            tree: TreeConfig::default(),
            seed: 1,
        }
    }
}

impl ForestConfig {
    pub fn features_for(&self, d: usize) -> usize {
        self.features_per_split
            .unwrap_or_else(|| (d as f64).sqrt().floor() as usize)
            .clamp(1, d.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
    /// Seed each tree was grown from, parallel to `trees`.
    pub seeds: Vec<u64>,
}

impl RandomForest {
    /// Fraction of trees voting clickbait.
    pub fn score(&self, x: &[f64]) -> f64 {
        let votes = self.trees.iter().filter(|t| t.score(x) >= 0.5).count();
        votes as f64 / self.trees.len() as f64
    }
}

/// Per-tree seeds drawn from the master seed, fixed before any tree is grown
/// so parallel and sequential training agree.
pub fn tree_seeds(master: u64, n: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    (0..n).map(|_| rng.random()).collect()
}

pub fn train_forest(xs: &[Vec<f64>], ys: &[bool], config: &ForestConfig) -> Result<RandomForest> {
    if config.n_trees < 1 {
        return Err(Error::Parameter("a forest needs at least one tree".into()));
    }
    super::check_training_set(xs, ys)?;
    if config.tree.min_leaf == 0 {
        return Err(Error::Parameter("min_leaf must be at least 1".into()));
    }
    let n = xs.len();
    let k = config.features_for(xs[0].len());
    let seeds = tree_seeds(config.seed, config.n_trees);
    let trees = seeds
        .par_iter()
        .map(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rows: Vec<usize> = if config.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let sampler = FeatureSampler { rng: &mut rng, k };
            grow_tree(xs, ys, &rows, &config.tree, Some(sampler))
        })
        .collect();
    Ok(RandomForest { trees, seeds })
}
