use std::path::Path;
use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};

use super::{build_features, run_phase, write_phases_tsv, FeatureMatrix, PipelineConfig, PipelineState};
use crate::category_rules::{category_stats, CategoryStats};
use crate::corpus::{split_indices, Corpus, Label, Phase, PhaseSummary};
use crate::error::{Error, Result};
use crate::eval::{evaluate, render_plots, ClassifierEvaluation};
use crate::learners::{train, ClassifierConfig, FeatureGroup, ModelKind, TrainedModel};
use crate::manifold::write_embedding_tsv;

/// Share of headlines the original study reports as recategorized.
pub const PUBLISHED_RECATEGORIZED_FRACTION: f64 = 0.10;

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Ingest {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

// ============================================================================
// Split
// ============================================================================

/// Stratified train/test partition as record positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub test_fraction: f64,
    pub seed: u64,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitIndices {
    pub fn compute(corpus: &Corpus, test_fraction: f64, seed: u64) -> Result<SplitIndices> {
        let (train, test) = split_indices(corpus, test_fraction, seed)?;
        Ok(SplitIndices {
            test_fraction,
            seed,
            train,
            test,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<SplitIndices> {
        read_json(path)
    }
}

// ============================================================================
// Training and evaluation
// ============================================================================

fn gather(rows: &[Vec<f64>], positions: &[usize]) -> Result<Vec<Vec<f64>>> {
    positions
        .iter()
        .map(|&i| {
            rows.get(i)
                .cloned()
                .ok_or_else(|| Error::Parameter(format!("record position {i} is out of range")))
        })
        .collect()
}

/// Train all three classifiers on the training rows restricted to `groups`,
/// against gold labels.
pub fn train_classifiers(
    features: &FeatureMatrix,
    groups: &[FeatureGroup],
    train_rows: &[usize],
    config: &ClassifierConfig,
) -> Result<Vec<TrainedModel>> {
    let (layout, rows) = features.select(groups);
    if layout.is_empty() {
        return Err(Error::Parameter("feature mask selects no columns".into()));
    }
    let xs = gather(&rows, train_rows)?;
    let ys: Vec<bool> = train_rows.iter().map(|&i| features.labels[i]).collect();
    ModelKind::ALL
        .into_iter()
        .map(|kind| {
            info!("training {} on {} rows × {} features", kind.display_name(), xs.len(), layout.len());
            train(kind, &xs, &ys, &layout, config)
        })
        .collect()
}

/// Score each model on the test rows and evaluate against gold labels.
pub fn evaluate_classifiers(
    models: &[TrainedModel],
    features: &FeatureMatrix,
    test_rows: &[usize],
    bins: usize,
) -> Result<Vec<ClassifierEvaluation>> {
    let truth: Vec<bool> = test_rows.iter().map(|&i| features.labels[i]).collect();
    models
        .iter()
        .map(|model| {
            let groups = model.groups();
            let (layout, rows) = features.select(&groups);
            if layout != model.layout {
                return Err(Error::ModelFormat(format!(
                    "{} model was trained on a different feature layout",
                    model.kind
                )));
            }
            let scores = model.score_all(&gather(&rows, test_rows)?)?;
            let names = groups.iter().map(|g| g.as_str().to_string()).collect();
            evaluate(model.kind, names, &truth, &scores, bins)
        })
        .collect()
}

// ============================================================================
// Report
// ============================================================================

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub records: usize,
    pub clickbait: usize,
    pub non_clickbait: usize,
    pub skipped_lines: usize,
    pub fingerprint: String,
}

impl CorpusSummary {
    pub fn of(corpus: &Corpus) -> CorpusSummary {
        CorpusSummary {
            records: corpus.len(),
            clickbait: corpus.count_label(Label::Clickbait),
            non_clickbait: corpus.count_label(Label::NonClickbait),
            skipped_lines: corpus.skipped_lines(),
            fingerprint: corpus.fingerprint(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecategorizationReport {
    /// Share changed by the formality phase relative to the rules phase.
    pub formality_changed_fraction: f64,
    /// Share changed by the cluster phase relative to the formality phase.
    pub cluster_changed_fraction: f64,
    /// Share whose final label differs from the rules-phase label.
    pub recategorized_fraction: f64,
    pub published_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSummary {
    pub vocabulary_size: usize,
    pub embedding_epoch_losses: Vec<f64>,
    pub sampled: usize,
    pub perplexity: f64,
    pub kl: f64,
    pub kl_after_exaggeration: Option<f64>,
    pub kl_trace: Vec<(usize, f64)>,
    pub cluster_sizes: [usize; 2],
    pub cluster_labels: [Label; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: PipelineConfig,
    pub corpus: CorpusSummary,
    pub phases: Vec<PhaseSummary>,
    pub recategorization: RecategorizationReport,
    pub categories: CategoryStats,
    pub undefined_formality: usize,
    pub manifold: ManifoldSummary,
    pub split: SplitIndicesSummary,
    pub evaluations: Vec<ClassifierEvaluation>,
    /// Written to `timing.json` rather than the report so report bodies are
    /// reproducible byte for byte.
    #[serde(skip)]
    pub timing: Vec<StageTiming>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitIndicesSummary {
    pub train: usize,
    pub test: usize,
    pub test_fraction: f64,
    pub seed: u64,
}

impl RunReport {
    pub fn assemble(
        config: &PipelineConfig,
        state: &PipelineState,
        split: &SplitIndices,
        evaluations: Vec<ClassifierEvaluation>,
    ) -> Result<RunReport> {
        let manifold = state.manifold.as_ref().ok_or(Error::PhaseOrder {
            requested: "report",
            next: "cluster",
        })?;
        let model = state.embedding.as_ref().expect("cluster phase recorded");
        let recat = state.recategorization.expect("cluster phase recorded");
        let formality_changed = state
            .summaries
            .iter()
            .find(|s| s.phase == Phase::Formality)
            .map_or(0.0, |s| s.changed_fraction);
        Ok(RunReport {
            config: config.clone(),
            corpus: CorpusSummary::of(&state.corpus),
            phases: state.summaries.clone(),
            recategorization: RecategorizationReport {
                formality_changed_fraction: formality_changed,
                cluster_changed_fraction: recat.changed_from_formality,
                recategorized_fraction: recat.changed_from_rules,
                published_fraction: PUBLISHED_RECATEGORIZED_FRACTION,
            },
            categories: category_stats(&state.corpus, &state.verdicts)?,
            undefined_formality: state.undefined_formality(),
            manifold: ManifoldSummary {
                vocabulary_size: model.vocab.len(),
                embedding_epoch_losses: model.epoch_losses.clone(),
                sampled: manifold.sample.len(),
                perplexity: manifold.embedding.perplexity,
                kl: manifold.embedding.kl,
                kl_after_exaggeration: manifold.embedding.kl_after_exaggeration,
                kl_trace: manifold.embedding.kl_trace.clone(),
                cluster_sizes: manifold.assignment.cluster_sizes(),
                cluster_labels: manifold.assignment.labels,
            },
            split: SplitIndicesSummary {
                train: split.train.len(),
                test: split.test.len(),
                test_fraction: split.test_fraction,
                seed: split.seed,
            },
            evaluations,
            timing: Vec::new(),
        })
    }

    pub fn auc(&self, kind: ModelKind) -> Option<f64> {
        self.evaluations.iter().find(|e| e.kind == kind).map(|e| e.roc.auc)
    }
}

// ============================================================================
// Full run
// ============================================================================

fn timed<T>(timing: &mut Vec<StageTiming>, stage: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    info!("stage {stage}");
    let out = f().map_err(|e| e.in_stage(stage))?;
    timing.push(StageTiming {
        stage: stage.to_string(),
        seconds: start.elapsed().as_secs_f64(),
    });
    Ok(out)
}

/// Run every stage and write all artifacts to `config.out_dir`. The state
/// file is rewritten after each phase, so a failing stage leaves the
/// intermediates of every completed stage behind.
pub fn run_all(config: &PipelineConfig) -> Result<RunReport> {
    let config = config.clone().resolve()?;
    let out = config.out_dir.clone();
    std::fs::create_dir_all(&out)?;
    let mut timing = Vec::new();

    let corpus = timed(&mut timing, "ingest", || {
        let corpus = config.corpus.load()?;
        corpus.write_jsonl(&out.join("corpus.jsonl"))?;
        Ok(corpus)
    })?;
    let mut state = PipelineState::new(corpus);
    for phase in Phase::ALL {
        let start = Instant::now();
        let result = run_phase(&mut state, &config, phase);
        state.save(&out)?;
        write_phases_tsv(&out.join("phases.tsv"), &state.corpus)?;
        result?;
        timing.push(StageTiming {
            stage: phase.as_str().to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    let manifold = state.manifold.as_ref().expect("cluster phase ran");
    write_embedding_tsv(&out.join("embedding.tsv"), &state.corpus, manifold)?;

    let features = timed(&mut timing, "features", || {
        let features = build_features(&state, &config)?;
        features.write_csv(&out.join("features.csv"))?;
        Ok(features)
    })?;
    let split = SplitIndices::compute(&state.corpus, config.test_fraction, config.seed)?;
    split.save(&out.join("split.json"))?;
    let groups = config.feature_groups();
    let models = timed(&mut timing, "train", || {
        let models = train_classifiers(&features, &groups, &split.train, &config.classifiers)?;
        let dir = out.join("models");
        std::fs::create_dir_all(&dir)?;
        for m in &models {
            m.save(&dir.join(format!("{}.json", m.kind)))?;
        }
        Ok(models)
    })?;
    let evaluations = timed(&mut timing, "evaluate", || {
        let evals = evaluate_classifiers(&models, &features, &split.test, config.reliability_bins)?;
        write_json(&out.join("evaluation.json"), &evals)?;
        Ok(evals)
    })?;
    timed(&mut timing, "plot", || render_plots(&evaluations, &out.join("plots")))?;

    let mut report = RunReport::assemble(&config, &state, &split, evaluations)?;
    write_json(&out.join("report.json"), &report)?;
    write_json(&out.join("timing.json"), &timing)?;
    report.timing = timing;
    Ok(report)
}

// ============================================================================
// Ablation
// ============================================================================

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationEntry {
    pub groups: Vec<FeatureGroup>,
    pub evaluations: Vec<ClassifierEvaluation>,
}

impl AblationEntry {
    pub fn auc(&self, kind: ModelKind) -> Option<f64> {
        self.evaluations.iter().find(|e| e.kind == kind).map(|e| e.roc.auc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub config: PipelineConfig,
    pub corpus_fingerprint: String,
    /// One entry per requested group, then the all-groups mask.
    pub entries: Vec<AblationEntry>,
}

impl AblationReport {
    pub fn all_groups(&self) -> &AblationEntry {
        self.entries.last().expect("ablation always includes the all-groups mask")
    }
}

/// Train and evaluate each single-group mask from `groups` independently,
/// then the all-groups mask.
pub fn ablate(
    features: &FeatureMatrix,
    split: &SplitIndices,
    groups: &[FeatureGroup],
    config: &PipelineConfig,
) -> Result<Vec<AblationEntry>> {
    if groups.is_empty() {
        return Err(Error::Parameter("ablation needs at least one feature group".into()));
    }
    let mut masks: Vec<Vec<FeatureGroup>> = FeatureGroup::ALL
        .into_iter()
        .filter(|g| groups.contains(g))
        .map(|g| vec![g])
        .collect();
    masks.push(FeatureGroup::ALL.to_vec());
    masks
        .into_iter()
        .map(|mask| {
            let models = train_classifiers(features, &mask, &split.train, &config.classifiers)?;
            let evaluations = evaluate_classifiers(&models, features, &split.test, config.reliability_bins)?;
            Ok(AblationEntry {
                groups: mask,
                evaluations,
            })
        })
        .collect()
}

/// Run the three phases in memory, then ablate over `groups`.
pub fn run_ablation(config: &PipelineConfig, groups: &[FeatureGroup]) -> Result<AblationReport> {
    if groups.is_empty() {
        return Err(Error::Parameter("ablation needs at least one feature group".into()));
    }
    let config = config.clone().resolve()?;
    let corpus = config.corpus.load().map_err(|e| e.in_stage("ingest"))?;
    let mut state = PipelineState::new(corpus);
    for phase in Phase::ALL {
        run_phase(&mut state, &config, phase)?;
    }
    let features = build_features(&state, &config).map_err(|e| e.in_stage("features"))?;
    let split = SplitIndices::compute(&state.corpus, config.test_fraction, config.seed)?;
    let entries = ablate(&features, &split, groups, &config).map_err(|e| e.in_stage("ablate"))?;
    Ok(AblationReport {
        corpus_fingerprint: state.corpus.fingerprint(),
        config,
        entries,
    })
}
