use clickbait::manifold::{conditional_affinities, symmetrize, two_means, within_cluster_ss};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ============================================================================
// Affinity calibration, checked by recomputing entropies from scratch
// ============================================================================

fn entropy_bits(row: &[f64]) -> f64 {
    let mut h = 0.0;
    for &p in row {
        if p > 0.0 {
            h -= p * p.ln() / std::f64::consts::LN_2;
        }
    }
    h
}

#[test]
fn five_random_points_reach_target_perplexity() {
    for seed in 0..25 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..4).map(|_| rng.random_range(-10.0..10.0)).collect())
            .collect();
        let a = conditional_affinities(&pts, 2.0).unwrap();
        for i in 0..5 {
            let perplexity = 2f64.powf(entropy_bits(a.row(i)));
            assert!((perplexity - 2.0).abs() <= 1e-4, "seed {seed} row {i}: {perplexity}");
        }
        let joint = symmetrize(a);
        let total: f64 = (0..5).flat_map(|i| joint.row(i).to_vec()).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
}

// ============================================================================
// 2-means against exhaustive search
// ============================================================================

fn best_partition(points: &[[f64; 2]]) -> (f64, Vec<usize>) {
    let n = points.len();
    let mut best = (f64::INFINITY, vec![]);
    // Point 0 always sits in cluster 0, so each split is visited once.
    for mask in 1u32..(1 << (n - 1)) {
        let clusters: Vec<usize> = (0..n)
            .map(|i| if i == 0 { 0 } else { ((mask >> (i - 1)) & 1) as usize })
            .collect();
        let mut sums = [[0.0; 2]; 2];
        let mut counts = [0.0; 2];
        for (p, &c) in points.iter().zip(&clusters) {
            sums[c][0] += p[0];
            sums[c][1] += p[1];
            counts[c] += 1.0;
        }
        let centroids = [0, 1].map(|c| [sums[c][0] / counts[c], sums[c][1] / counts[c]]);
        let ss = within_cluster_ss(points, &clusters, &centroids);
        if ss < best.0 {
            best = (ss, clusters);
        }
    }
    best
}

#[test]
fn two_means_matches_exhaustive_minimizer() {
    for seed in 0..12 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let n = 12 + (seed as usize % 9);
        let points: Vec<[f64; 2]> = (0..n)
            .map(|_| [rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)])
            .collect();
        let (best_ss, best) = best_partition(&points);
        let a = two_means(&points, seed, 10).unwrap();
        assert!((a.objective - best_ss).abs() < 1e-9, "seed {seed}: {} vs {best_ss}", a.objective);
        let normalized: Vec<usize> = a.clusters.iter().map(|&c| c ^ a.clusters[0]).collect();
        assert_eq!(normalized, best, "seed {seed}");
    }
}
