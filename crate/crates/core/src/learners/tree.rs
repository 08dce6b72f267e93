//! CART classification tree with Gini impurity.

use rand::seq::index;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Splits must improve impurity by more than this to be taken; ties within it
/// keep the earlier (feature, threshold) candidate.
const GAIN_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeConfig {
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: None,
            min_leaf: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        /// Fraction of clickbait among the training rows reaching this leaf.
        score: f64,
        samples: usize,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    /// Node 0 is the root.
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn score(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { score, .. } => return score,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Features tested anywhere in the tree, ascending and deduplicated.
    pub fn split_features(&self) -> Vec<usize> {
        let mut f: Vec<usize> = self
            .nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature),
                Node::Leaf { .. } => None,
            })
            .collect();
        f.sort_unstable();
        f.dedup();
        f
    }
}

/// Gini impurity 1 − p² − (1 − p)² of a node with `pos` positives in `n`.
pub fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    /// Parent impurity minus the size-weighted child impurity.
    pub gain: f64,
}

/// Best split of `rows` over `features`, scanning midpoints between
/// consecutive distinct values. Both children must hold at least `min_leaf`
/// rows.
pub fn best_split(
    xs: &[Vec<f64>],
    ys: &[bool],
    rows: &[usize],
    features: &[usize],
    min_leaf: usize,
) -> Option<SplitChoice> {
    let n = rows.len();
    let total_pos = rows.iter().filter(|&&r| ys[r]).count();
    let parent = gini(total_pos, n);
    let mut best: Option<SplitChoice> = None;
    let mut sorted = rows.to_vec();
    for &f in features {
        sorted.sort_by(|&a, &b| xs[a][f].total_cmp(&xs[b][f]));
        let mut left_pos = 0;
        for k in 0..n - 1 {
            left_pos += usize::from(ys[sorted[k]]);
            let (lo, hi) = (xs[sorted[k]][f], xs[sorted[k + 1]][f]);
            let left_n = k + 1;
            if lo == hi || left_n < min_leaf || n - left_n < min_leaf {
                continue;
            }
            let weighted = (left_n as f64 * gini(left_pos, left_n)
                + (n - left_n) as f64 * gini(total_pos - left_pos, n - left_n))
                / n as f64;
            let gain = parent - weighted;
            if gain > best.map_or(GAIN_EPSILON, |b| b.gain + GAIN_EPSILON) {
                best = Some(SplitChoice {
                    feature: f,
                    threshold: lo + (hi - lo) / 2.0,
                    gain,
                });
            }
        }
    }
    best
}

/// Random feature subsetting for forests: `k` features drawn per split,
/// visited in ascending order.
pub(crate) struct FeatureSampler<'a> {
    pub rng: &'a mut ChaCha8Rng,
    pub k: usize,
}

struct Builder<'a, 'b> {
    xs: &'a [Vec<f64>],
    ys: &'a [bool],
    config: &'a TreeConfig,
    sampler: Option<FeatureSampler<'b>>,
    nodes: Vec<Node>,
}

impl Builder<'_, '_> {
    fn grow(&mut self, rows: &[usize], depth: usize) -> usize {
        let pos = rows.iter().filter(|&&r| self.ys[r]).count();
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            score: pos as f64 / rows.len() as f64,
            samples: rows.len(),
        });
        let pure = pos == 0 || pos == rows.len();
        let depth_capped = self.config.max_depth.is_some_and(|m| depth >= m);
        if pure || depth_capped || rows.len() < 2 * self.config.min_leaf.max(1) {
            return id;
        }
        let d = self.xs[0].len();
        let features: Vec<usize> = match &mut self.sampler {
            Some(s) if s.k < d => {
                let mut f = index::sample(s.rng, d, s.k).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..d).collect(),
        };
        let Some(split) = best_split(self.xs, self.ys, rows, &features, self.config.min_leaf.max(1))
        else {
            return id;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&r| self.xs[r][split.feature] <= split.threshold);
        let left = self.grow(&left_rows, depth + 1);
        let right = self.grow(&right_rows, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }
}

pub(crate) fn grow_tree(
    xs: &[Vec<f64>],
    ys: &[bool],
    rows: &[usize],
    config: &TreeConfig,
    sampler: Option<FeatureSampler<'_>>,
) -> DecisionTree {
    let mut b = Builder {
        xs,
        ys,
        config,
        sampler,
        nodes: Vec::new(),
    };
    b.grow(rows, 0);
    DecisionTree { nodes: b.nodes }
}

pub fn train_tree(xs: &[Vec<f64>], ys: &[bool], config: &TreeConfig) -> Result<DecisionTree> {
    super::check_training_set(xs, ys)?;
    if config.min_leaf == 0 {
        return Err(Error::Parameter("min_leaf must be at least 1".into()));
    }
    let rows: Vec<usize> = (0..xs.len()).collect();
    Ok(grow_tree(xs, ys, &rows, config, None))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_feature_split() {
        let xs: Vec<Vec<f64>> = (0..8)
            .map(|i| vec![0.3, (i % 3) as f64, 7.0, if i < 4 { 0.0 } else { 1.0 }])
            .collect();
        let ys: Vec<bool> = (0..8).map(|i| i >= 4).collect();
        let t = train_tree(&xs, &ys, &TreeConfig::default()).unwrap();
        assert_eq!(t.depth(), 1);
        assert_eq!(
            t.nodes[0],
            Node::Split { feature: 3, threshold: 0.5, left: 1, right: 2 }
        );
    }

    #[test]
    fn pure_input_is_a_single_leaf() {
        let xs = vec![vec![1.0], vec![2.0], vec![3.0]];
        let t = train_tree(&xs, &[true, true, true], &TreeConfig::default()).unwrap();
        assert_eq!(t.nodes, vec![Node::Leaf { score: 1.0, samples: 3 }]);
    }

    #[test]
    fn depth_zero_scores_class_frequency() {
        let xs: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let ys: Vec<bool> = (0..10).map(|i| i % 5 != 0).collect();
        let t = train_tree(&xs, &ys, &TreeConfig { max_depth: Some(0), min_leaf: 1 }).unwrap();
        assert_eq!(t.score(&[-100.0]), 0.8);
        assert_eq!(t.score(&[100.0]), 0.8);
    }

    #[test]
    fn ties_prefer_lowest_feature_then_threshold() {
        // Features 0 and 1 are identical; both split equally well at 1.5 and 3.5.
        let xs = vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0], vec![4.0, 4.0]];
        let ys = vec![false, true, false, true];
        let s = best_split(&xs, &ys, &[0, 1, 2, 3], &[0, 1], 1).unwrap();
        assert_eq!(s.feature, 0);
        assert_eq!(s.threshold, 1.5);
    }

    #[test]
    fn min_leaf_is_respected() {
        let xs: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
        let ys = vec![true, false, false, false, false, false];
        let t = train_tree(&xs, &ys, &TreeConfig { max_depth: None, min_leaf: 2 }).unwrap();
        for n in &t.nodes {
            if let Node::Leaf { samples, .. } = n {
                assert!(*samples >= 2);
            }
        }
    }

    #[test]
    fn gini_values() {
        assert_eq!(gini(0, 4), 0.0);
        assert_eq!(gini(2, 4), 0.5);
        assert!((gini(1, 4) - 0.375).abs() < 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn scores_depend_only_on_split_features(seed in 0u64..200) {
            use rand::{Rng, SeedableRng};
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let xs: Vec<Vec<f64>> = (0..30).map(|_| (0..5).map(|_| rng.random_range(0.0..1.0)).collect()).collect();
            let ys: Vec<bool> = xs.iter().map(|x| x[1] + x[3] > 1.0).collect();
            let t = train_tree(&xs, &ys, &TreeConfig::default()).unwrap();
            let used = t.split_features();
            let a: Vec<f64> = (0..5).map(|_| rng.random_range(0.0..1.0)).collect();
            let mut b: Vec<f64> = (0..5).map(|_| rng.random_range(0.0..1.0)).collect();
            for &f in &used {
                b[f] = a[f];
            }
            proptest::prop_assert_eq!(t.score(&a), t.score(&b));
            proptest::prop_assert!((0.0..=1.0).contains(&t.score(&a)));
        }
    }
}
