use std::collections::HashMap;

use clickbait::corpus::{Corpus, HeadlineRecord, Label};
use clickbait::embedding::{
    build_vocab, headline_vector, pair_gradients, pair_loss, train_skipgram, NegativeSampler,
    SkipGramConfig, Vocabulary,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn corpus(lines: &[String]) -> Corpus {
    Corpus::from_records(
        lines
            .iter()
            .enumerate()
            .map(|(i, t)| HeadlineRecord {
                id: i as u32,
                text: t.clone(),
                body: None,
                url: None,
                gold_label: Label::NonClickbait,
            })
            .collect(),
    )
    .unwrap()
}

// ============================================================================
// Training behaviour
// ============================================================================

#[test]
fn co_occurring_words_end_up_closer() {
    // Input vectors grow similar for words that share contexts, so each group
    // has four members that always appear together in shuffled order.
    let groups = [["xone", "xtwo", "xthree", "xfour"], ["yone", "ytwo", "ythree", "yfour"]];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut lines = Vec::new();
    for _ in 0..200 {
        for g in &groups {
            let mut words = g.to_vec();
            for i in (1..words.len()).rev() {
                words.swap(i, rng.random_range(0..=i));
            }
            lines.push(words.join(" "));
        }
    }
    let c = corpus(&lines);
    let vocab = build_vocab(&c, 1).unwrap();
    for seed in 0..5 {
        let cfg = SkipGramConfig {
            dimension: 10,
            window: 3,
            negatives: 3,
            epochs: 10,
            min_count: 1,
            seed,
            ..SkipGramConfig::default()
        };
        let m = train_skipgram(&c, &vocab, &cfg).unwrap();
        let same = m.cosine("xone", "xtwo").unwrap();
        let cross = m.cosine("xone", "yone").unwrap();
        assert!(same > cross, "seed {seed}: {same} <= {cross}");
        assert!(m.epoch_losses.last().unwrap() < m.epoch_losses.first().unwrap());
    }
}

#[test]
fn vocabulary_matches_independent_count() {
    let text = include_str!("../../../data/sample/clickbait_data");
    let other = include_str!("../../../data/sample/non_clickbait_data");
    let lines: Vec<String> = text.lines().chain(other.lines()).map(String::from).collect();
    let c = corpus(&lines);
    let vocab = build_vocab(&c, 2).unwrap();

    let mut oracle: HashMap<String, u64> = HashMap::new();
    for line in &lines {
        for raw in line.split(|ch: char| !(ch.is_alphanumeric() || ch == '\'' || ch == '-')) {
            let w = raw.trim_matches(|ch: char| ch == '\'' || ch == '-').to_lowercase();
            if w.chars().next().is_some_and(char::is_alphabetic) {
                *oracle.entry(w).or_default() += 1;
            }
        }
    }
    let kept: HashMap<&String, &u64> = oracle.iter().filter(|(_, &n)| n >= 2).collect();
    assert_eq!(vocab.len(), kept.len());
    for (w, &&n) in &kept {
        let idx = vocab.get(w).unwrap_or_else(|| panic!("missing {w}"));
        assert_eq!(vocab.frequency(idx), n, "{w}");
    }
}

// ============================================================================
// Negative sampling table
// ============================================================================

#[test]
fn negative_sampler_reproduces_smoothed_unigram() {
    let counts: HashMap<String, u64> = [("a", 100), ("b", 200), ("c", 300), ("d", 400)]
        .into_iter()
        .map(|(w, n)| (w.to_string(), n))
        .collect();
    let vocab = Vocabulary::from_counts(counts, 1).unwrap();
    let sampler = NegativeSampler::new(&vocab).unwrap();
    let weights: Vec<f64> = (0..vocab.len() as u32)
        .map(|i| (vocab.frequency(i) as f64).powf(0.75))
        .collect();
    let total: f64 = weights.iter().sum();

    let draws = 1_000_000;
    let mut hits = vec![0usize; vocab.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..draws {
        hits[sampler.sample(&mut rng) as usize] += 1;
    }
    for (i, &h) in hits.iter().enumerate() {
        let expected = weights[i] / total;
        let observed = h as f64 / draws as f64;
        let rel = (observed - expected).abs() / expected;
        // Every word carries at least 12% of the mass, so 1% relative error
        // is more than three standard deviations of the sampling noise.
        assert!(rel < 0.01, "word {i}: observed {observed}, expected {expected}");
    }
}

// ============================================================================
// Gradient check
// ============================================================================

fn finite_difference_check(seed: u64, d: usize, k: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gen = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() };
    let center = gen(d);
    let context = gen(d);
    let negs: Vec<Vec<f64>> = (0..k).map(|_| gen(d)).collect();
    let loss = |v: &[f64], u: &[f64], n: &[Vec<f64>]| {
        let refs: Vec<&[f64]> = n.iter().map(Vec::as_slice).collect();
        pair_loss(v, u, &refs)
    };
    let refs: Vec<&[f64]> = negs.iter().map(Vec::as_slice).collect();
    let g = pair_gradients(&center, &context, &refs);
    let h = 1e-5;
    let check = |analytic: f64, plus: f64, minus: f64, what: &str| {
        let numeric = (plus - minus) / (2.0 * h);
        let scale = analytic.abs().max(numeric.abs()).max(1e-3);
        assert!(
            (analytic - numeric).abs() / scale < 1e-5,
            "seed {seed} {what}: analytic {analytic} numeric {numeric}"
        );
    };
    for i in 0..d {
        let (mut p, mut m) = (center.clone(), center.clone());
        p[i] += h;
        m[i] -= h;
        check(g.center[i], loss(&p, &context, &negs), loss(&m, &context, &negs), "center");
        let (mut p, mut m) = (context.clone(), context.clone());
        p[i] += h;
        m[i] -= h;
        check(g.context[i], loss(&center, &p, &negs), loss(&center, &m, &negs), "context");
        for j in 0..k {
            let (mut p, mut m) = (negs.clone(), negs.clone());
            p[j][i] += h;
            m[j][i] -= h;
            check(g.negatives[j][i], loss(&center, &context, &p), loss(&center, &context, &m), "negative");
        }
    }
}

#[test]
fn analytic_gradient_matches_finite_differences() {
    for seed in 0..100 {
        finite_difference_check(seed, 3 + (seed as usize % 6), 1 + (seed as usize % 5));
    }
}

// ============================================================================
// Headline vectors
// ============================================================================

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn headline_vector_ignores_word_order(order in Just((0..6usize).collect::<Vec<_>>()).prop_shuffle()) {
        let base = ["alpha", "beta", "gamma", "delta", "unseen", "beta"];
        let lines: Vec<String> = vec!["alpha beta gamma delta".into(), "beta gamma".into()];
        let c = corpus(&lines);
        let vocab = build_vocab(&c, 1).unwrap();
        let cfg = SkipGramConfig { dimension: 6, min_count: 1, epochs: 1, ..SkipGramConfig::default() };
        let m = train_skipgram(&c, &vocab, &cfg).unwrap();
        let a = headline_vector(&m, &base.join(" "));
        let shuffled: Vec<&str> = order.iter().map(|&i| base[i]).collect();
        let b = headline_vector(&m, &shuffled.join(" "));
        prop_assert!((a.coverage - b.coverage).abs() < 1e-15);
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }
}
