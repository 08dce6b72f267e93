//! Third-phase relabelling: headline vectors are reduced to two dimensions
//! with t-SNE, split into two clusters, and each cluster takes the label
//! that dominates it in the formality phase.

pub mod affinity;
pub mod kmeans;
pub mod tsne;

pub use affinity::{conditional_affinities, squared_distances, symmetrize, AffinityMatrix, JointMatrix};
pub use kmeans::{clickbait_fractions, map_labels, two_means, within_cluster_ss, ClusterAssignment};
pub use tsne::{kl_divergence, kl_gradient, tsne, Embedding2D, TsneConfig};

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Label, Phase, PhaseSummary};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManifoldConfig {
    pub tsne: TsneConfig,
    /// Larger inputs are embedded on a stratified sample of this size.
    pub sample_cap: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for ManifoldConfig {
    fn default() -> Self {
        ManifoldConfig {
            tsne: TsneConfig::default(),
            sample_cap: 5000,
            restarts: kmeans::DEFAULT_RESTARTS,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldOutcome {
    /// Indices of the points that went through t-SNE, ascending.
    pub sample: Vec<usize>,
    /// Layout of the sampled points, parallel to `sample`.
    pub embedding: Embedding2D,
    /// Clustering of the sampled points, parallel to `sample`.
    pub assignment: ClusterAssignment,
    /// Cluster of every input point; unsampled points take the cluster of
    /// their nearest sampled neighbour.
    pub clusters: Vec<usize>,
    pub labels: Vec<Label>,
}

impl ManifoldOutcome {
    /// 2-D coordinates of every point; `None` for unsampled points.
    pub fn coordinates(&self) -> Vec<Option<[f64; 2]>> {
        let mut out = vec![None; self.clusters.len()];
        for (k, &i) in self.sample.iter().enumerate() {
            out[i] = Some(self.embedding.points[k]);
        }
        out
    }
}

/// Indices of a label-stratified sample of size `cap` (all indices when the
/// input is no larger than the cap).
pub fn stratified_sample(labels: &[Label], cap: usize, seed: u64) -> Vec<usize> {
    let n = labels.len();
    if n <= cap {
        return (0..n).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut click: Vec<usize> = (0..n).filter(|&i| labels[i].is_clickbait()).collect();
    let mut other: Vec<usize> = (0..n).filter(|&i| !labels[i].is_clickbait()).collect();
    let take_click = ((click.len() as f64 / n as f64) * cap as f64).round() as usize;
    let take_click = take_click.min(click.len()).min(cap);
    click.shuffle(&mut rng);
    other.shuffle(&mut rng);
    let mut sample: Vec<usize> = click[..take_click]
        .iter()
        .chain(&other[..(cap - take_click).min(other.len())])
        .copied()
        .collect();
    sample.sort_unstable();
    sample
}

/// For each point, the position in `sample` of its nearest sampled point
/// (squared Euclidean distance, ties to the earlier sample position).
pub fn nearest_sampled(vectors: &[Vec<f64>], sample: &[usize]) -> Vec<usize> {
    vectors
        .par_iter()
        .map(|v| {
            let mut best = (f64::INFINITY, 0);
            for (k, &s) in sample.iter().enumerate() {
                let d: f64 = v.iter().zip(&vectors[s]).map(|(a, b)| (a - b) * (a - b)).sum();
                if d < best.0 {
                    best = (d, k);
                }
            }
            best.1
        })
        .collect()
}

/// Embed, cluster and label the headline vectors. `previous` holds each
/// headline's formality-phase label and drives both the sample
/// stratification and the cluster→label mapping.
pub fn cluster_headlines(
    vectors: &[Vec<f64>],
    previous: &[Label],
    config: &ManifoldConfig,
) -> Result<ManifoldOutcome> {
    if vectors.len() != previous.len() {
        return Err(Error::LengthMismatch(vectors.len(), previous.len()));
    }
    if config.sample_cap < 4 {
        return Err(Error::Parameter("sample_cap must be at least 4".into()));
    }
    let sample = stratified_sample(previous, config.sample_cap, config.seed);
    let sampled: Vec<Vec<f64>> = sample.iter().map(|&i| vectors[i].clone()).collect();
    let embedding = tsne(&sampled, &config.tsne)?;
    let mut assignment = two_means(&embedding.points, config.seed, config.restarts)?;
    let sampled_previous: Vec<Label> = sample.iter().map(|&i| previous[i]).collect();
    map_labels(&mut assignment, &sampled_previous)?;

    let clusters: Vec<usize> = if sample.len() == vectors.len() {
        assignment.clusters.clone()
    } else {
        nearest_sampled(vectors, &sample)
            .into_iter()
            .map(|k| assignment.clusters[k])
            .collect()
    };
    let labels = clusters.iter().map(|&c| assignment.labels[c]).collect();
    Ok(ManifoldOutcome {
        sample,
        embedding,
        assignment,
        clusters,
        labels,
    })
}

/// Share of records whose label changed between phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Recategorization {
    pub summary: PhaseSummary,
    /// Fraction whose cluster label differs from the formality-phase label.
    pub changed_from_formality: f64,
    /// Fraction whose cluster label differs from the rules-phase label.
    pub changed_from_rules: f64,
}

fn disagreement(a: &[Label], b: &[Label]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.iter().zip(b).filter(|(x, y)| x != y).count() as f64 / a.len() as f64
}

/// Record `labels` as the cluster phase of `corpus`.
pub fn recategorize(corpus: &mut Corpus, labels: &[Label]) -> Result<Recategorization> {
    let summary = corpus.push_phase(Phase::Cluster, labels)?;
    let rules = corpus.phase_labels(Phase::Rules).expect("phase order enforced");
    let formality = corpus.phase_labels(Phase::Formality).expect("phase order enforced");
    Ok(Recategorization {
        summary,
        changed_from_formality: disagreement(&formality, labels),
        changed_from_rules: disagreement(&rules, labels),
    })
}

/// Tab-separated dump: id, x, y, cluster, label. Unsampled points have
/// empty coordinates.
pub fn write_embedding_tsv(path: &Path, corpus: &Corpus, outcome: &ManifoldOutcome) -> Result<()> {
    if corpus.len() != outcome.clusters.len() {
        return Err(Error::LengthMismatch(corpus.len(), outcome.clusters.len()));
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "id\tx\ty\tcluster\tphase3_label")?;
    for ((record, xy), (cluster, label)) in corpus
        .records()
        .iter()
        .zip(outcome.coordinates())
        .zip(outcome.clusters.iter().zip(&outcome.labels))
    {
        let (x, y) = xy.map_or((String::new(), String::new()), |[x, y]| (x.to_string(), y.to_string()));
        writeln!(out, "{}\t{x}\t{y}\t{cluster}\t{}", record.id, label.as_str())?;
    }
    out.flush()?;
    Ok(())
}
