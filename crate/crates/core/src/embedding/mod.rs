//! Skip-gram word embeddings trained with negative sampling, and
//! per-headline vectors as the mean of in-vocabulary word vectors.

mod io;

pub use io::{load_model, read_model, save_model, write_model, FORMAT_VERSION, MAGIC};

use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::textkit::words;

// ============================================================================
// Vocabulary
// ============================================================================

#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    words: Vec<String>,
    frequencies: Vec<u64>,
    index: HashMap<String, u32>,
    min_count: usize,
}

impl Vocabulary {
    /// Words are ordered by descending frequency, ties alphabetically.
    pub fn from_counts(counts: HashMap<String, u64>, min_count: usize) -> Result<Vocabulary> {
        let mut entries: Vec<(String, u64)> = counts
            .into_iter()
            .filter(|&(_, n)| n >= min_count as u64)
            .collect();
        if entries.is_empty() {
            return Err(Error::EmptyVocabulary { min_count });
        }
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, (w, _))| (w.clone(), i as u32))
            .collect();
        let (words, frequencies) = entries.into_iter().unzip();
        Ok(Vocabulary {
            words,
            frequencies,
            index,
            min_count,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn word(&self, index: u32) -> &str {
        &self.words[index as usize]
    }

    pub fn frequency(&self, index: u32) -> u64 {
        self.frequencies[index as usize]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn min_count(&self) -> usize {
        self.min_count
    }

    fn encode(&self, text: &str) -> Vec<u32> {
        words(text).iter().filter_map(|w| self.get(w)).collect()
    }
}

/// Count lowercased word tokens across all headlines and keep those seen at
/// least `min_count` times.
pub fn build_vocab(corpus: &Corpus, min_count: usize) -> Result<Vocabulary> {
    if corpus.is_empty() {
        return Err(Error::Parameter("cannot build a vocabulary from an empty corpus".into()));
    }
    let mut counts: HashMap<String, u64> = HashMap::new();
    for r in corpus.records() {
        for w in words(&r.text) {
            *counts.entry(w).or_default() += 1;
        }
    }
    Vocabulary::from_counts(counts, min_count)
}

// ============================================================================
// Negative sampling
// ============================================================================

/// Draws word indices with probability proportional to frequency^0.75.
#[derive(Debug, Clone)]
pub struct NegativeSampler {
    dist: WeightedIndex<f64>,
}

impl NegativeSampler {
    pub const POWER: f64 = 0.75;

    pub fn new(vocab: &Vocabulary) -> Result<NegativeSampler> {
        let weights: Vec<f64> = vocab
            .frequencies
            .iter()
            .map(|&f| (f as f64).powf(Self::POWER))
            .collect();
        let dist = WeightedIndex::new(&weights)
            .map_err(|e| Error::Parameter(format!("negative sampling table: {e}")))?;
        Ok(NegativeSampler { dist })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.dist.sample(rng) as u32
    }
}

// ============================================================================
// Per-pair objective
// ============================================================================

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// ln(1 + e^x) without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Negative-sampling loss of one (center, context) pair:
/// −ln σ(u_o·v) − Σ_k ln σ(−u_k·v).
pub fn pair_loss(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> f64 {
    softplus(-dot(context, center))
        + negatives.iter().map(|n| softplus(dot(n, center))).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairGradients {
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

/// Analytic gradients of [`pair_loss`] with respect to each vector.
pub fn pair_gradients(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> PairGradients {
    let pos = sigmoid(dot(context, center)) - 1.0;
    let mut g_center: Vec<f64> = context.iter().map(|u| pos * u).collect();
    let g_context = center.iter().map(|v| pos * v).collect();
    let g_negatives = negatives
        .iter()
        .map(|n| {
            let s = sigmoid(dot(n, center));
            for (g, u) in g_center.iter_mut().zip(n.iter()) {
                *g += s * u;
            }
            center.iter().map(|v| s * v).collect()
        })
        .collect();
    PairGradients {
        center: g_center,
        context: g_context,
        negatives: g_negatives,
    }
}

// ============================================================================
// Model and training
// ============================================================================

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SkipGramConfig {
    pub dimension: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// The linearly decayed rate never drops below this fraction of the
    /// initial rate.
    pub min_learning_rate_fraction: f64,
    pub min_count: usize,
    /// Frequent-word subsampling threshold; `None` disables subsampling.
    pub subsample: Option<f64>,
    pub seed: u64,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        SkipGramConfig {
            dimension: 100,
            window: 5,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            min_learning_rate_fraction: 1e-4,
            min_count: 5,
            subsample: None,
            seed: 1,
        }
    }
}

impl SkipGramConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::Parameter("embedding dimension must be positive".into()));
        }
        if self.window == 0 || self.negatives == 0 {
            return Err(Error::Parameter("window and negatives must be ≥ 1".into()));
        }
        if !(self.learning_rate >= 0.0) {
            return Err(Error::Parameter("learning rate must be ≥ 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    pub vocab: Vocabulary,
    pub dimension: usize,
    /// Row-major V×d input (word) vectors.
    pub input: Vec<f64>,
    /// Row-major V×d output (context) vectors.
    pub output: Vec<f64>,
    pub config: SkipGramConfig,
    pub epoch_losses: Vec<f64>,
}

impl EmbeddingModel {
    /// Input vector of a word; the representation used downstream.
    pub fn vector(&self, index: u32) -> &[f64] {
        let d = self.dimension;
        &self.input[index as usize * d..(index as usize + 1) * d]
    }

    pub fn word_vector(&self, word: &str) -> Option<&[f64]> {
        self.vocab.get(word).map(|i| self.vector(i))
    }

    pub fn cosine(&self, a: &str, b: &str) -> Option<f64> {
        let (x, y) = (self.word_vector(a)?, self.word_vector(b)?);
        let denom = dot(x, x).sqrt() * dot(y, y).sqrt();
        Some(if denom == 0.0 { 0.0 } else { dot(x, y) / denom })
    }

    fn initialize(vocab: Vocabulary, config: &SkipGramConfig, rng: &mut ChaCha8Rng) -> EmbeddingModel {
        let d = config.dimension;
        let n = vocab.len() * d;
        let half_width = 0.5 / d as f64;
        let input = (0..n).map(|_| rng.random_range(-half_width..half_width)).collect();
        EmbeddingModel {
            vocab,
            dimension: d,
            input,
            output: vec![0.0; n],
            config: config.clone(),
            epoch_losses: Vec::new(),
        }
    }

    /// One SGD step on a (center, context) pair with the given negatives,
    /// moving every vector by −lr × its [`pair_gradients`] entry. Returns the
    /// pair loss before the step.
    pub fn sgd_step(&mut self, center: u32, context: u32, negatives: &[u32], lr: f64) -> f64 {
        let d = self.dimension;
        let c = center as usize * d;
        let v: Vec<f64> = self.input[c..c + d].to_vec();
        let mut center_grad = vec![0.0; d];
        let mut loss = 0.0;
        let targets = std::iter::once((context, true)).chain(negatives.iter().map(|&n| (n, false)));
        for (target, positive) in targets {
            let o = target as usize * d;
            let u = &mut self.output[o..o + d];
            let score = dot(u, &v);
            let (coef, term) = if positive {
                (sigmoid(score) - 1.0, softplus(-score))
            } else {
                (sigmoid(score), softplus(score))
            };
            loss += term;
            for k in 0..d {
                center_grad[k] += coef * u[k];
                u[k] -= lr * coef * v[k];
            }
        }
        for (x, g) in self.input[c..c + d].iter_mut().zip(&center_grad) {
            *x -= lr * g;
        }
        loss
    }
}

/// Train skip-gram with negative sampling over the headlines of `corpus`.
/// Single-threaded and deterministic for a fixed seed.
pub fn train_skipgram(
    corpus: &Corpus,
    vocab: &Vocabulary,
    config: &SkipGramConfig,
) -> Result<EmbeddingModel> {
    config.validate()?;
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary {
            min_count: vocab.min_count,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = EmbeddingModel::initialize(vocab.clone(), config, &mut rng);
    let sampler = NegativeSampler::new(vocab)?;
    let sentences: Vec<Vec<u32>> = corpus
        .records()
        .iter()
        .map(|r| vocab.encode(&r.text))
        .collect();
    let total_words: u64 = vocab.frequencies.iter().sum();
    let schedule_length = (sentences.iter().map(Vec::len).sum::<usize>() * config.epochs).max(1) as f64;
    let keep_probability: Option<Vec<f64>> = config.subsample.map(|t| {
        vocab
            .frequencies
            .iter()
            .map(|&f| {
                let ratio = f as f64 / (t * total_words as f64);
                ((ratio.sqrt() + 1.0) / ratio).min(1.0)
            })
            .collect()
    });

    let mut processed = 0usize;
    let mut negatives = Vec::with_capacity(config.negatives);
    for epoch in 0..config.epochs {
        let mut epoch_loss = 0.0;
        let mut pairs = 0usize;
        for sentence in &sentences {
            let kept: Vec<u32> = match &keep_probability {
                Some(p) => sentence
                    .iter()
                    .copied()
                    .filter(|&w| rng.random::<f64>() < p[w as usize])
                    .collect(),
                None => sentence.clone(),
            };
            for (i, &center) in kept.iter().enumerate() {
                let progress = processed as f64 / schedule_length;
                let lr = config.learning_rate
                    * (1.0 - progress).max(config.min_learning_rate_fraction);
                processed += 1;
                let lo = i.saturating_sub(config.window);
                let hi = (i + config.window).min(kept.len() - 1);
                for (j, &context) in kept.iter().enumerate().take(hi + 1).skip(lo) {
                    if j == i {
                        continue;
                    }
                    negatives.clear();
                    for _ in 0..config.negatives {
                        let n = sampler.sample(&mut rng);
                        if n != context {
                            negatives.push(n);
                        }
                    }
                    epoch_loss += model.sgd_step(center, context, &negatives, lr);
                    pairs += 1;
                }
            }
        }
        let mean = if pairs == 0 { 0.0 } else { epoch_loss / pairs as f64 };
        if !mean.is_finite() || model.input.iter().any(|x| !x.is_finite()) {
            return Err(Error::TrainingDiverged { epoch });
        }
        log::debug!("skip-gram epoch {epoch}: mean pair loss {mean:.5}");
        model.epoch_losses.push(mean);
    }
    Ok(model)
}

// ============================================================================
// Headline vectors
// ============================================================================

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadlineVector {
    pub values: Vec<f64>,
    /// Fraction of the headline's word tokens found in the vocabulary.
    pub coverage: f64,
}

impl HeadlineVector {
    pub fn is_degenerate(&self) -> bool {
        self.coverage == 0.0
    }
}

/// Mean input vector over the in-vocabulary word tokens of `text`.
pub fn headline_vector(model: &EmbeddingModel, text: &str) -> HeadlineVector {
    let tokens = words(text);
    let mut values = vec![0.0; model.dimension];
    let mut hits = 0usize;
    for w in &tokens {
        if let Some(v) = model.word_vector(w) {
            for (acc, x) in values.iter_mut().zip(v) {
                *acc += x;
            }
            hits += 1;
        }
    }
    if hits > 0 {
        for x in &mut values {
            *x /= hits as f64;
        }
    }
    HeadlineVector {
        values,
        coverage: if tokens.is_empty() {
            0.0
        } else {
            hits as f64 / tokens.len() as f64
        },
    }
}
