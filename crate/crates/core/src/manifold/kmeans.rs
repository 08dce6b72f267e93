//! Two-cluster k-means with k-means++ seeding and restarts.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 100;
pub const CENTROID_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_RESTARTS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    /// Cluster id (0 or 1) of each point.
    pub clusters: Vec<usize>,
    pub centroids: [[f64; 2]; 2],
    /// Within-cluster sum of squares after each Lloyd iteration of the
    /// winning restart.
    pub objective_trace: Vec<f64>,
    pub objective: f64,
    /// Label assigned to each cluster; the two entries always differ.
    pub labels: [Label; 2],
}

impl ClusterAssignment {
    pub fn label_of(&self, point: usize) -> Label {
        self.labels[self.clusters[point]]
    }

    pub fn cluster_sizes(&self) -> [usize; 2] {
        let ones = self.clusters.iter().filter(|&&c| c == 1).count();
        [self.clusters.len() - ones, ones]
    }
}

fn dist2(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Within-cluster sum of squared distances to the given centroids.
pub fn within_cluster_ss(points: &[[f64; 2]], clusters: &[usize], centroids: &[[f64; 2]; 2]) -> f64 {
    points
        .iter()
        .zip(clusters)
        .map(|(p, &c)| dist2(p, &centroids[c]))
        .sum()
}

fn assign(points: &[[f64; 2]], centroids: &[[f64; 2]; 2]) -> Vec<usize> {
    points
        .iter()
        .map(|p| usize::from(dist2(p, &centroids[1]) < dist2(p, &centroids[0])))
        .collect()
}

fn means(points: &[[f64; 2]], clusters: &[usize], previous: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut sums = [[0.0; 2]; 2];
    let mut counts = [0usize; 2];
    for (p, &c) in points.iter().zip(clusters) {
        sums[c][0] += p[0];
        sums[c][1] += p[1];
        counts[c] += 1;
    }
    let mut out = *previous;
    for c in 0..2 {
        if counts[c] > 0 {
            out[c] = [sums[c][0] / counts[c] as f64, sums[c][1] / counts[c] as f64];
        }
    }
    out
}

fn plus_plus_seeds(points: &[[f64; 2]], rng: &mut ChaCha8Rng) -> [[f64; 2]; 2] {
    let first = points[rng.random_range(0..points.len())];
    let weights: Vec<f64> = points.iter().map(|p| dist2(p, &first)).collect();
    // Callers ensure not all points coincide, so some weight is positive.
    let second = WeightedIndex::new(&weights).expect("distinct points exist");
    [first, points[second.sample(rng)]]
}

struct Run {
    clusters: Vec<usize>,
    centroids: [[f64; 2]; 2],
    trace: Vec<f64>,
}

fn lloyd(points: &[[f64; 2]], mut centroids: [[f64; 2]; 2]) -> Run {
    let mut clusters = assign(points, &centroids);
    let mut trace = Vec::new();
    for _ in 0..MAX_ITERATIONS {
        let next = means(points, &clusters, &centroids);
        let moved = dist2(&next[0], &centroids[0])
            .sqrt()
            .max(dist2(&next[1], &centroids[1]).sqrt());
        centroids = next;
        clusters = assign(points, &centroids);
        trace.push(within_cluster_ss(points, &clusters, &centroids));
        if moved < CENTROID_TOLERANCE {
            break;
        }
    }
    Run {
        clusters,
        centroids,
        trace,
    }
}

/// Partition `points` into two clusters. The best of `restarts` seeded
/// k-means++ runs (lowest within-cluster sum of squares) is kept; labels are
/// left as cluster 0 → clickbait until [`map_labels`] is applied.
pub fn two_means(points: &[[f64; 2]], seed: u64, restarts: usize) -> Result<ClusterAssignment> {
    if points.len() < 2 {
        return Err(Error::Parameter(format!("2-means needs at least 2 points, got {}", points.len())));
    }
    if points.iter().all(|p| p == &points[0]) {
        return Err(Error::DegenerateClusters);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Run)> = None;
    for _ in 0..restarts.max(1) {
        let run = lloyd(points, plus_plus_seeds(points, &mut rng));
        let objective = *run.trace.last().expect("at least one iteration");
        if best.as_ref().is_none_or(|(b, _)| objective < *b) {
            best = Some((objective, run));
        }
    }
    let (objective, run) = best.expect("at least one restart");
    if !run.clusters.contains(&0) || !run.clusters.contains(&1) {
        return Err(Error::DegenerateClusters);
    }
    Ok(ClusterAssignment {
        clusters: run.clusters,
        centroids: run.centroids,
        objective_trace: run.trace,
        objective,
        labels: [Label::Clickbait, Label::NonClickbait],
    })
}

/// Map clusters to labels from the previous phase: the cluster with the
/// larger fraction of clickbait members becomes the clickbait cluster. On a
/// tie cluster 0 is clickbait.
pub fn map_labels(assignment: &mut ClusterAssignment, previous: &[Label]) -> Result<()> {
    if previous.len() != assignment.clusters.len() {
        return Err(Error::LengthMismatch(assignment.clusters.len(), previous.len()));
    }
    let fractions = clickbait_fractions(&assignment.clusters, previous);
    assignment.labels = if fractions[1] > fractions[0] {
        [Label::NonClickbait, Label::Clickbait]
    } else {
        [Label::Clickbait, Label::NonClickbait]
    };
    Ok(())
}

/// Fraction of clickbait labels inside each cluster (0 for an empty cluster).
pub fn clickbait_fractions(clusters: &[usize], labels: &[Label]) -> [f64; 2] {
    let mut hits = [0usize; 2];
    let mut sizes = [0usize; 2];
    for (&c, l) in clusters.iter().zip(labels) {
        sizes[c] += 1;
        hits[c] += usize::from(l.is_clickbait());
    }
    [0, 1].map(|c| {
        if sizes[c] == 0 {
            0.0
        } else {
            hits[c] as f64 / sizes[c] as f64
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separated_pairs() {
        let pts = [[0.0, 0.0], [0.0, 1.0], [10.0, 10.0], [10.0, 11.0]];
        let a = two_means(&pts, 1, DEFAULT_RESTARTS).unwrap();
        assert_eq!(a.clusters[0], a.clusters[1]);
        assert_eq!(a.clusters[2], a.clusters[3]);
        assert_ne!(a.clusters[0], a.clusters[2]);
        assert!((a.objective - 1.0).abs() < 1e-12);
        assert_eq!(a.cluster_sizes(), [2, 2]);
    }

    #[test]
    fn identical_points_are_degenerate() {
        assert!(matches!(two_means(&[[1.0, 2.0]; 5], 0, 3), Err(Error::DegenerateClusters)));
        assert!(two_means(&[[1.0, 2.0]], 0, 3).is_err());
    }

    #[test]
    fn majority_mapping() {
        let clusters: Vec<usize> = (0..20).map(|i| usize::from(i >= 10)).collect();
        let mut labels = vec![Label::NonClickbait; 20];
        for l in labels.iter_mut().skip(10).take(9) {
            *l = Label::Clickbait;
        }
        let mut a = ClusterAssignment {
            clusters,
            centroids: [[0.0; 2]; 2],
            objective_trace: vec![],
            objective: 0.0,
            labels: [Label::Clickbait, Label::NonClickbait],
        };
        map_labels(&mut a, &labels).unwrap();
        assert_eq!(a.labels, [Label::NonClickbait, Label::Clickbait]);
        assert_eq!(a.label_of(15), Label::Clickbait);

        map_labels(&mut a, &vec![Label::Clickbait; 20]).unwrap();
        assert_eq!(a.labels, [Label::Clickbait, Label::NonClickbait]);
        assert!(map_labels(&mut a, &labels[..3]).is_err());
    }

    #[test]
    fn deterministic_under_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts: Vec<[f64; 2]> = (0..60).map(|_| [rng.random_range(0.0..5.0), rng.random_range(0.0..5.0)]).collect();
        assert_eq!(two_means(&pts, 9, 5).unwrap(), two_means(&pts, 9, 5).unwrap());
    }

    proptest::proptest! {
        #[test]
        fn lloyd_objective_never_increases(seed in 0u64..500, n in 3usize..40) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)]).collect();
            let a = two_means(&pts, seed, 1).unwrap();
            for w in a.objective_trace.windows(2) {
                proptest::prop_assert!(w[1] <= w[0] + 1e-9);
            }
            proptest::prop_assert!(a.cluster_sizes().iter().all(|&s| s > 0));
        }
    }
}
