//! `clickbait`: command-line driver for the detection pipeline.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use clickbait::corpus::Phase;
use clickbait::eval::{render_plots, ClassifierEvaluation};
use clickbait::learners::{FeatureGroup, ModelKind, TrainedModel};
use clickbait::manifold::write_embedding_tsv;
use clickbait::pipeline::{
    ablate, build_features, evaluate_classifiers, run_ablation, run_all, train_classifiers,
    write_phases_tsv, AblationEntry, AblationReport, FeatureMatrix, PipelineConfig, PipelineState,
    SplitIndices,
};
use clickbait::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "clickbait", version, about = "Hybrid clickbait headline detection pipeline")]
struct Cli {
    /// Pipeline configuration (TOML, or JSON when the name ends in .json).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; 1 gives the reproducibility reference.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Directory for all artifacts; overrides the config file.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct CorpusArgs {
    /// Plain-text clickbait headlines, one per line.
    #[arg(long, requires = "non_clickbait", conflicts_with = "jsonl")]
    clickbait: Option<PathBuf>,

    /// Plain-text non-clickbait headlines, one per line.
    #[arg(long, requires = "clickbait")]
    non_clickbait: Option<PathBuf>,

    /// JSON-lines corpus with text, label and optional body/url.
    #[arg(long)]
    jsonl: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct GroupArgs {
    /// Feature groups, comma separated.
    #[arg(long, value_enum, value_delimiter = ',')]
    groups: Option<Vec<GroupArg>>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GroupArg {
    CategoryFlags,
    Formality,
    MarksLength,
    Embedding,
    Cluster,
}

impl From<GroupArg> for FeatureGroup {
    fn from(g: GroupArg) -> FeatureGroup {
        match g {
            GroupArg::CategoryFlags => FeatureGroup::CategoryFlags,
            GroupArg::Formality => FeatureGroup::Formality,
            GroupArg::MarksLength => FeatureGroup::MarksLength,
            GroupArg::Embedding => FeatureGroup::Embedding,
            GroupArg::Cluster => FeatureGroup::Cluster,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PhaseArg {
    Rules,
    Formality,
    Cluster,
}

impl From<PhaseArg> for Phase {
    fn from(p: PhaseArg) -> Phase {
        match p {
            PhaseArg::Rules => Phase::Rules,
            PhaseArg::Formality => Phase::Formality,
            PhaseArg::Cluster => Phase::Cluster,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load the corpus and start a fresh pipeline state.
    Ingest(CorpusArgs),
    /// Run one labelling phase on the persisted state.
    Phase {
        #[arg(value_enum)]
        phase: PhaseArg,
    },
    /// Build features, split, and train the three classifiers.
    Train(GroupArgs),
    /// Evaluate the trained classifiers on the test split.
    Evaluate,
    /// Render SVG figures and TSV tables from the evaluation.
    Plot,
    /// Evaluate each feature group alone and all groups together.
    Ablate {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        groups: GroupArgs,
    },
    /// Run every stage end to end.
    RunAll {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        groups: GroupArgs,
    },
}

// ============================================================================
// Configuration
// ============================================================================

fn apply_corpus(config: &mut PipelineConfig, args: &CorpusArgs) {
    if args.jsonl.is_some() {
        config.corpus.jsonl = args.jsonl.clone();
        config.corpus.clickbait = None;
        config.corpus.non_clickbait = None;
    }
    if args.clickbait.is_some() {
        config.corpus.clickbait = args.clickbait.clone();
        config.corpus.non_clickbait = args.non_clickbait.clone();
        config.corpus.jsonl = None;
    }
}

fn apply_groups(config: &mut PipelineConfig, args: &GroupArgs) {
    if let Some(groups) = &args.groups {
        config.groups = groups.iter().map(|&g| g.into()).collect();
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut config = match &cli.config {
        Some(path) => PipelineConfig::from_path(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(dir) = &cli.out_dir {
        config.out_dir = dir.clone();
    }
    match &cli.command {
        Command::Ingest(corpus) => apply_corpus(&mut config, corpus),
        Command::Train(groups) => apply_groups(&mut config, groups),
        Command::Ablate { corpus, groups } | Command::RunAll { corpus, groups } => {
            apply_corpus(&mut config, corpus);
            apply_groups(&mut config, groups);
        }
        _ => {}
    }
    config.resolve()
}

// ============================================================================
// Commands
// ============================================================================

fn print_evaluations(evaluations: &[ClassifierEvaluation]) {
    println!("{:<14} {:>7} {:>9} {:>9} {:>7} {:>7} {:>10}", "classifier", "AUC", "accuracy", "precision", "recall", "F1", "published");
    for e in evaluations {
        println!(
            "{:<14} {:>7.4} {:>9.4} {:>9.4} {:>7.4} {:>7.4} {:>10.2}",
            e.kind.display_name(),
            e.roc.auc,
            e.accuracy,
            e.precision,
            e.recall,
            e.f1,
            e.published_auc
        );
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Ingest {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

fn ingest(config: &PipelineConfig) -> Result<()> {
    let out = &config.out_dir;
    let corpus = config.corpus.load()?;
    std::fs::create_dir_all(out)?;
    corpus.write_jsonl(&out.join("corpus.jsonl"))?;
    let state = PipelineState::new(corpus);
    state.save(out)?;
    write_phases_tsv(&out.join("phases.tsv"), &state.corpus)?;
    println!(
        "ingested {} headlines ({} skipped lines), fingerprint {}",
        state.corpus.len(),
        state.corpus.skipped_lines(),
        state.corpus.fingerprint()
    );
    Ok(())
}

fn phase(config: &PipelineConfig, phase: Phase) -> Result<()> {
    let out = &config.out_dir;
    let mut state = PipelineState::load(out)?;
    let summary = clickbait::pipeline::run_phase(&mut state, config, phase)?;
    state.save(out)?;
    write_phases_tsv(&out.join("phases.tsv"), &state.corpus)?;
    if let Some(manifold) = &state.manifold {
        write_embedding_tsv(&out.join("embedding.tsv"), &state.corpus, manifold)?;
    }
    println!(
        "{phase}: {} clickbait, {} non-clickbait, {} changed ({:.2}%)",
        summary.clickbait,
        summary.non_clickbait,
        summary.changed,
        100.0 * summary.changed_fraction
    );
    if let Some(r) = state.recategorization {
        println!(
            "recategorized relative to rules phase: {:.2}% (published: almost 10%)",
            100.0 * r.changed_from_rules
        );
    }
    Ok(())
}

fn train(config: &PipelineConfig) -> Result<()> {
    let out = &config.out_dir;
    let state = PipelineState::load(out)?;
    let features = build_features(&state, config)?;
    features.write_csv(&out.join("features.csv"))?;
    let split = SplitIndices::compute(&state.corpus, config.test_fraction, config.seed)?;
    split.save(&out.join("split.json"))?;
    let models = train_classifiers(&features, &config.feature_groups(), &split.train, &config.classifiers)
        .map_err(|e| e.in_stage("train"))?;
    let dir = out.join("models");
    std::fs::create_dir_all(&dir)?;
    for m in &models {
        m.save(&dir.join(format!("{}.json", m.kind)))?;
        println!("trained {} on {} rows × {} features", m.kind.display_name(), split.train.len(), m.dimension());
    }
    Ok(())
}

fn evaluate(config: &PipelineConfig) -> Result<()> {
    let out = &config.out_dir;
    let features = FeatureMatrix::read_csv(&out.join("features.csv"))?;
    let split = SplitIndices::load(&out.join("split.json"))?;
    let models = ModelKind::ALL
        .into_iter()
        .map(|k| TrainedModel::load(&out.join("models").join(format!("{k}.json"))))
        .collect::<Result<Vec<_>>>()?;
    let evaluations = evaluate_classifiers(&models, &features, &split.test, config.reliability_bins)
        .map_err(|e| e.in_stage("evaluate"))?;
    write_json(&out.join("evaluation.json"), &evaluations)?;
    print_evaluations(&evaluations);
    Ok(())
}

fn plot(config: &PipelineConfig) -> Result<()> {
    let out = &config.out_dir;
    let evaluations: Vec<ClassifierEvaluation> = read_json(&out.join("evaluation.json"))?;
    let files = render_plots(&evaluations, &out.join("plots"))?;
    println!("wrote {} files to {}", files.len(), out.join("plots").display());
    Ok(())
}

fn print_ablation(entries: &[AblationEntry]) {
    println!("{:<24} {:>7} {:>7} {:>7}", "groups", "SVM", "Tree", "Forest");
    for e in entries {
        let label = if e.groups.len() == FeatureGroup::ALL.len() {
            "all groups".to_string()
        } else {
            e.groups.iter().map(|g| g.as_str()).collect::<Vec<_>>().join("+")
        };
        let auc = |k| e.auc(k).unwrap_or(f64::NAN);
        println!(
            "{:<24} {:>7.4} {:>7.4} {:>7.4}",
            label,
            auc(ModelKind::Svm),
            auc(ModelKind::Tree),
            auc(ModelKind::Forest)
        );
    }
}

/// Reuses persisted features and split when present, otherwise runs the
/// phases in memory.
fn ablation(config: &PipelineConfig) -> Result<()> {
    let out = &config.out_dir;
    let groups = config.feature_groups();
    let (features_path, split_path) = (out.join("features.csv"), out.join("split.json"));
    let report = if features_path.is_file() && split_path.is_file() {
        info!("ablating over persisted features in {}", out.display());
        let features = FeatureMatrix::read_csv(&features_path)?;
        let split = SplitIndices::load(&split_path)?;
        let state = PipelineState::load(out)?;
        AblationReport {
            corpus_fingerprint: state.corpus.fingerprint(),
            entries: ablate(&features, &split, &groups, config).map_err(|e| e.in_stage("ablate"))?,
            config: config.clone(),
        }
    } else {
        run_ablation(config, &groups)?
    };
    std::fs::create_dir_all(out)?;
    write_json(&out.join("ablation.json"), &report)?;
    print_ablation(&report.entries);
    Ok(())
}

fn run_everything(config: &PipelineConfig) -> Result<()> {
    let report = run_all(config)?;
    println!(
        "{} headlines, fingerprint {}",
        report.corpus.records, report.corpus.fingerprint
    );
    for s in &report.phases {
        println!(
            "phase {:<9} clickbait {:>6}  non-clickbait {:>6}  changed {:>5.2}%",
            s.phase.as_str(),
            s.clickbait,
            s.non_clickbait,
            100.0 * s.changed_fraction
        );
    }
    println!(
        "recategorized relative to rules phase: {:.2}% (published: almost 10%)",
        100.0 * report.recategorization.recategorized_fraction
    );
    print!("{}", report.categories.to_table());
    print_evaluations(&report.evaluations);
    println!("artifacts in {}", config.out_dir.display());
    Ok(())
}

fn execute(cli: &Cli) -> Result<()> {
    let config = load_config(cli)?;
    match &cli.command {
        Command::Ingest(_) => ingest(&config),
        Command::Phase { phase: p } => phase(&config, (*p).into()),
        Command::Train(_) => train(&config),
        Command::Evaluate => evaluate(&config),
        Command::Plot => plot(&config),
        Command::Ablate { .. } => ablation(&config),
        Command::RunAll { .. } => run_everything(&config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(u8::from(e.use_stderr()));
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
