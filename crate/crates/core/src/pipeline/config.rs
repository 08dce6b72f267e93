use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::category_rules::RuleSet;
use crate::corpus::{load_corpus, load_corpus_jsonl, Corpus};
use crate::embedding::SkipGramConfig;
use crate::error::{Error, Result};
use crate::eval::DEFAULT_RELIABILITY_BINS;
use crate::formality::FormalityConfig;
use crate::learners::{ClassifierConfig, FeatureGroup};
use crate::manifold::ManifoldConfig;

pub const DEFAULT_SEED: u64 = 42;

/// Where the headlines come from: either the two plain-text files (one per
/// class) or a single JSON-lines file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSource {
    pub clickbait: Option<PathBuf>,
    pub non_clickbait: Option<PathBuf>,
    pub jsonl: Option<PathBuf>,
}

impl CorpusSource {
    pub fn load(&self) -> Result<Corpus> {
        match (&self.clickbait, &self.non_clickbait, &self.jsonl) {
            (Some(cb), Some(ncb), None) => load_corpus(cb, ncb),
            (None, None, Some(path)) => load_corpus_jsonl(path),
            (None, None, None) => Err(Error::Parameter(
                "no corpus configured: set corpus.clickbait and corpus.non_clickbait, or corpus.jsonl".into(),
            )),
            _ => Err(Error::Parameter(
                "configure either both plain-text files or one JSON-lines file, not a mix".into(),
            )),
        }
    }
}

/// Every setting that affects a run. Loaded from TOML (or JSON when the file
/// ends in `.json`); missing fields take their defaults.
///
/// The master `seed` is copied into every component seed by [`resolve`], so
/// one number pins the whole run.
///
/// [`resolve`]: PipelineConfig::resolve
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: CorpusSource,
    /// Rule file for the category detectors; the bundled rules when absent.
    pub rules: Option<PathBuf>,
    pub formality: FormalityConfig,
    pub embedding: SkipGramConfig,
    pub manifold: ManifoldConfig,
    pub classifiers: ClassifierConfig,
    /// Feature groups fed to the classifiers.
    pub groups: Vec<FeatureGroup>,
    pub test_fraction: f64,
    pub reliability_bins: usize,
    pub seed: u64,
    /// Not echoed into reports: it does not influence any result.
    #[serde(skip_serializing)]
    pub out_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus: CorpusSource::default(),
            rules: None,
            formality: FormalityConfig::default(),
            embedding: SkipGramConfig::default(),
            manifold: ManifoldConfig::default(),
            classifiers: ClassifierConfig::default(),
            groups: FeatureGroup::ALL.to_vec(),
            test_fraction: 0.2,
            reliability_bins: DEFAULT_RELIABILITY_BINS,
            seed: DEFAULT_SEED,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl PipelineConfig {
    pub fn from_path(path: &Path) -> Result<PipelineConfig> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Ingest {
            path: path.to_path_buf(),
            source,
        })?;
        if path.extension().is_some_and(|e| e == "json") {
            Ok(serde_json::from_str(&text)?)
        } else {
            toml::from_str(&text).map_err(|e| Error::Parameter(format!("{}: {e}", path.display())))
        }
    }

    /// Copy the master seed into every component and validate.
    pub fn resolve(mut self) -> Result<PipelineConfig> {
        let seed = self.seed;
        self.embedding.seed = seed;
        self.manifold.seed = seed;
        self.manifold.tsne.seed = seed;
        self.classifiers.svm.seed = seed;
        self.classifiers.forest.seed = seed;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.formality.validate()?;
        self.embedding.validate()?;
        self.manifold.tsne.validate()?;
        if self.groups.is_empty() {
            return Err(Error::Parameter("at least one feature group is required".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Parameter(format!(
                "test_fraction must lie in (0, 1), got {}",
                self.test_fraction
            )));
        }
        if self.reliability_bins < 2 {
            return Err(Error::Parameter("reliability_bins must be at least 2".into()));
        }
        Ok(())
    }

    pub fn rule_set(&self) -> Result<RuleSet> {
        match &self.rules {
            Some(path) => RuleSet::from_path(path),
            None => Ok(RuleSet::default_rules()),
        }
    }

    /// The configured groups in canonical order without duplicates.
    pub fn feature_groups(&self) -> Vec<FeatureGroup> {
        FeatureGroup::ALL
            .into_iter()
            .filter(|g| self.groups.contains(g))
            .collect()
    }
}
