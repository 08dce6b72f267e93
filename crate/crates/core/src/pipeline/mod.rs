//! End-to-end orchestration: the three labelling phases, feature assembly,
//! classifier training and evaluation, ablation, and persisted artifacts.
//!
//! Every stage reads and writes files in one output directory so the CLI can
//! rerun stages independently:
//!
//! | file | contents |
//! |------|----------|
//! | `corpus.jsonl` | ingested records |
//! | `state.json` | records, phase history, detector verdicts, formality scores, clustering |
//! | `embedding.bin` | skip-gram model |
//! | `phases.tsv` | id, phase, label, changed |
//! | `embedding.tsv` | 2-D layout and cluster per headline |
//! | `features.csv` | feature matrix with header |
//! | `split.json` | train/test record positions |
//! | `models/<kind>.json` | trained classifiers |
//! | `evaluation.json` | per-classifier evaluation on the test split |
//! | `plots/` | SVG figures and TSV tables |
//! | `report.json` | full run report; `timing.json` holds wall-clock times |

mod config;
mod features;
mod report;

pub use config::{CorpusSource, PipelineConfig, DEFAULT_SEED};
pub use features::{build_features, FeatureMatrix};
pub use report::{
    ablate, evaluate_classifiers, run_ablation, run_all, train_classifiers, AblationEntry,
    AblationReport, CorpusSummary, RecategorizationReport, RunReport, SplitIndices, StageTiming,
};

use std::io::{BufWriter, Write};
use std::path::Path;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::category_rules::{detect, CategoryVerdict};
use crate::corpus::{Corpus, Label, Phase, PhaseSummary, ALL_PHASES_RECORDED};
use crate::embedding::{
    build_vocab, headline_vector, load_model, save_model, train_skipgram, EmbeddingModel,
};
use crate::error::{Error, Result};
use crate::formality::{formality_gate, score_text, FormalityScores};
use crate::manifold::{cluster_headlines, recategorize, ManifoldOutcome, Recategorization};
use crate::textkit::Lexicon;

pub const STATE_FILE: &str = "state.json";
pub const EMBEDDING_FILE: &str = "embedding.bin";

// ============================================================================
// State
// ============================================================================

/// Everything the phases have produced so far for one corpus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineState {
    pub corpus: Corpus,
    /// Detector output per record (rules phase).
    pub verdicts: Vec<CategoryVerdict>,
    /// Formality scores per record; `None` where a score is undefined.
    pub formality: Vec<Option<FormalityScores>>,
    pub manifold: Option<ManifoldOutcome>,
    pub recategorization: Option<Recategorization>,
    pub summaries: Vec<PhaseSummary>,
    /// Persisted separately in binary form.
    #[serde(skip)]
    pub embedding: Option<EmbeddingModel>,
}

impl PipelineState {
    pub fn new(corpus: Corpus) -> PipelineState {
        PipelineState {
            corpus,
            verdicts: Vec::new(),
            formality: Vec::new(),
            manifold: None,
            recategorization: None,
            summaries: Vec::new(),
            embedding: None,
        }
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut out = BufWriter::new(std::fs::File::create(dir.join(STATE_FILE))?);
        serde_json::to_writer(&mut out, self)?;
        out.flush()?;
        if let Some(model) = &self.embedding {
            save_model(model, &dir.join(EMBEDDING_FILE))?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<PipelineState> {
        let path = dir.join(STATE_FILE);
        let text = std::fs::read_to_string(&path).map_err(|source| Error::Ingest { path, source })?;
        let mut state: PipelineState = serde_json::from_str(&text)?;
        if state.corpus.latest_phase() == Some(Phase::Cluster) {
            state.embedding = Some(load_model(&dir.join(EMBEDDING_FILE))?);
        }
        Ok(state)
    }

    /// Headlines whose formality scores were undefined.
    pub fn undefined_formality(&self) -> usize {
        self.formality.iter().filter(|s| s.is_none()).count()
    }
}

// ============================================================================
// Phases
// ============================================================================

fn next_phase(corpus: &Corpus) -> Option<Phase> {
    match corpus.latest_phase() {
        None => Some(Phase::Rules),
        Some(p) => Phase::ALL.get(p.index() + 1).copied(),
    }
}

fn check_order(corpus: &Corpus, phase: Phase) -> Result<()> {
    match next_phase(corpus) {
        Some(next) if next == phase => Ok(()),
        next => Err(Error::PhaseOrder {
            requested: phase.as_str(),
            next: next.map_or(ALL_PHASES_RECORDED, Phase::as_str),
        }),
    }
}

fn rules_phase(state: &mut PipelineState, config: &PipelineConfig) -> Result<PhaseSummary> {
    let rules = config.rule_set()?;
    let lexicon = Lexicon::embedded();
    let verdicts: Vec<CategoryVerdict> = state
        .corpus
        .records()
        .par_iter()
        .map(|r| detect(r, &rules, lexicon))
        .collect();
    let labels: Vec<Label> = verdicts.iter().map(|v| v.label).collect();
    let summary = state.corpus.push_phase(Phase::Rules, &labels)?;
    state.verdicts = verdicts;
    Ok(summary)
}

fn formality_phase(state: &mut PipelineState, config: &PipelineConfig) -> Result<PhaseSummary> {
    let lexicon = Lexicon::embedded();
    let scores: Vec<Option<FormalityScores>> = state
        .corpus
        .records()
        .par_iter()
        .map(|r| match score_text(&r.text, lexicon) {
            Ok(s) => Ok(Some(s)),
            Err(Error::UndefinedScore(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let previous = state.corpus.phase_labels(Phase::Rules).expect("order checked");
    // A headline without defined scores keeps its rules-phase label.
    let labels: Vec<Label> = scores
        .iter()
        .zip(&previous)
        .map(|(s, &prev)| s.map_or(prev, |s| formality_gate(&s, &config.formality, prev).label))
        .collect();
    let summary = state.corpus.push_phase(Phase::Formality, &labels)?;
    state.formality = scores;
    let undefined = state.undefined_formality();
    if undefined > 0 {
        warn!("formality undefined for {undefined} headlines; they keep their rules-phase label");
    }
    Ok(summary)
}

fn cluster_phase(state: &mut PipelineState, config: &PipelineConfig) -> Result<PhaseSummary> {
    let vocab = build_vocab(&state.corpus, config.embedding.min_count)?;
    info!("vocabulary: {} words", vocab.len());
    let model = train_skipgram(&state.corpus, &vocab, &config.embedding)?;
    let vectors: Vec<Vec<f64>> = state
        .corpus
        .records()
        .par_iter()
        .map(|r| headline_vector(&model, &r.text).values)
        .collect();
    let previous = state.corpus.phase_labels(Phase::Formality).expect("order checked");
    let outcome = cluster_headlines(&vectors, &previous, &config.manifold)?;
    let recat = recategorize(&mut state.corpus, &outcome.labels)?;
    info!(
        "recategorized {:.2}% of headlines relative to the rules phase",
        100.0 * recat.changed_from_rules
    );
    state.embedding = Some(model);
    state.manifold = Some(outcome);
    state.recategorization = Some(recat);
    Ok(recat.summary)
}

/// Run one labelling phase. Phases must run in the order rules, formality,
/// cluster; errors carry the phase name.
pub fn run_phase(state: &mut PipelineState, config: &PipelineConfig, phase: Phase) -> Result<PhaseSummary> {
    let mut run = || -> Result<PhaseSummary> {
        check_order(&state.corpus, phase)?;
        let summary = match phase {
            Phase::Rules => rules_phase(state, config)?,
            Phase::Formality => formality_phase(state, config)?,
            Phase::Cluster => cluster_phase(state, config)?,
        };
        state.summaries.push(summary);
        Ok(summary)
    };
    run().map_err(|e| e.in_stage(phase.as_str()))
}

/// Tab-separated phase history: one row per record per completed phase.
pub fn write_phases_tsv(path: &Path, corpus: &Corpus) -> Result<()> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "id\tphase\tlabel\tchanged")?;
    for phase in Phase::ALL {
        let Some(history) = corpus.phase_history(phase) else {
            break;
        };
        for (record, p) in corpus.records().iter().zip(history) {
            writeln!(out, "{}\t{}\t{}\t{}", record.id, phase, p.label.as_str(), p.changed)?;
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category_rules::RuleSet;
    use crate::corpus::HeadlineRecord;

    fn fixture() -> Corpus {
        let texts = [
            ("You Won't Believe What Happened Next!", Label::Clickbait),
            ("Government announces new budget for regional hospitals", Label::NonClickbait),
            ("17 Things Only Cat Owners Will Understand", Label::Clickbait),
            ("Central bank raises interest rates by a quarter point", Label::NonClickbait),
            ("This Simple Trick Will Change Your Life Forever", Label::Clickbait),
        ];
        Corpus::from_records(
            texts
                .iter()
                .enumerate()
                .map(|(i, (t, l))| HeadlineRecord {
                    id: i as u32,
                    text: t.to_string(),
                    body: None,
                    url: None,
                    gold_label: *l,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn rules_phase_delegates_to_detect() {
        let mut state = PipelineState::new(fixture());
        let config = PipelineConfig::default();
        run_phase(&mut state, &config, Phase::Rules).unwrap();
        let rules = RuleSet::default_rules();
        for (r, label) in state.corpus.records().iter().zip(state.corpus.phase_labels(Phase::Rules).unwrap()) {
            assert_eq!(detect(r, &rules, Lexicon::embedded()).label, label);
        }
    }

    #[test]
    fn phases_out_of_order_are_rejected() {
        let mut state = PipelineState::new(fixture());
        let config = PipelineConfig::default();
        let err = run_phase(&mut state, &config, Phase::Formality).unwrap_err();
        assert!(matches!(err, Error::Stage { stage: "formality", ref source } if matches!(**source, Error::PhaseOrder { .. })));
        run_phase(&mut state, &config, Phase::Rules).unwrap();
        assert!(run_phase(&mut state, &config, Phase::Rules).is_err());
        assert!(run_phase(&mut state, &config, Phase::Cluster).is_err());
        run_phase(&mut state, &config, Phase::Formality).unwrap();
        assert_eq!(state.formality.len(), 5);
    }

    #[test]
    fn formality_changes_are_counted() {
        let mut state = PipelineState::new(fixture());
        let config = PipelineConfig::default();
        run_phase(&mut state, &config, Phase::Rules).unwrap();
        let summary = run_phase(&mut state, &config, Phase::Formality).unwrap();
        let rules = state.corpus.phase_labels(Phase::Rules).unwrap();
        let formal = state.corpus.phase_labels(Phase::Formality).unwrap();
        let changed = rules.iter().zip(&formal).filter(|(a, b)| a != b).count();
        assert_eq!(summary.changed, changed);
        assert_eq!(summary.changed_fraction, changed as f64 / 5.0);
    }

    #[test]
    fn phase_table_lists_each_completed_phase() {
        let mut state = PipelineState::new(fixture());
        let config = PipelineConfig::default();
        run_phase(&mut state, &config, Phase::Rules).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("phases.tsv");
        write_phases_tsv(&path, &state.corpus).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert!(text.lines().skip(1).all(|l| l.split('\t').nth(1) == Some("rules")));
    }

    #[test]
    fn state_round_trips_before_clustering() {
        let mut state = PipelineState::new(fixture());
        let config = PipelineConfig::default();
        run_phase(&mut state, &config, Phase::Rules).unwrap();
        run_phase(&mut state, &config, Phase::Formality).unwrap();
        let dir = tempfile::tempdir().unwrap();
        state.save(dir.path()).unwrap();
        let back = PipelineState::load(dir.path()).unwrap();
        assert_eq!(back.verdicts, state.verdicts);
        assert_eq!(back.formality, state.formality);
        assert_eq!(back.corpus.phase_labels(Phase::Formality), state.corpus.phase_labels(Phase::Formality));
    }
}
