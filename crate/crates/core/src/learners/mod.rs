//! From-scratch classifiers over the integrated feature vector: a linear
//! SVM, a CART tree and a random forest, behind one train/score interface.
//! Scores follow one convention: higher means more clickbait.

pub mod features;
pub mod forest;
pub mod svm;
pub mod tree;

pub use features::{
    feature_vector, marks_and_length, project, FeatureGroup, FeatureInputs, FeatureLayout,
    Standardizer,
};
pub use forest::{train_forest, ForestConfig, RandomForest};
pub use svm::{train_svm, LinearSvm, SvmConfig};
pub use tree::{train_tree, DecisionTree, TreeConfig};

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bumped whenever the persisted model layout changes.
pub const MODEL_FORMAT_VERSION: u32 = 1;

pub(crate) fn check_training_set(xs: &[Vec<f64>], ys: &[bool]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch(xs.len(), ys.len()));
    }
    let Some(first) = xs.first() else {
        return Err(Error::Parameter("training set is empty".into()));
    };
    let d = first.len();
    for x in xs {
        if x.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("training features must be finite".into()));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Svm,
    Tree,
    Forest,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Svm, ModelKind::Tree, ModelKind::Forest];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Svm => "svm",
            ModelKind::Tree => "tree",
            ModelKind::Forest => "forest",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::Svm => "SVM",
            ModelKind::Tree => "Decision Tree",
            ModelKind::Forest => "Random Forest",
        }
    }

    pub fn parse(s: &str) -> Option<ModelKind> {
        ModelKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Decision threshold on the score: 0 for the SVM margin, 0.5 for the
    /// tree leaf frequency and forest vote fraction.
    pub fn threshold(self) -> f64 {
        match self {
            ModelKind::Svm => 0.0,
            ModelKind::Tree | ModelKind::Forest => 0.5,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    pub svm: SvmConfig,
    pub tree: TreeConfig,
    pub forest: ForestConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    Svm(LinearSvm),
    Tree(DecisionTree),
    Forest(RandomForest),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub kind: ModelKind,
    /// Names and groups of the input columns, in order.
    pub layout: FeatureLayout,
    /// Applied to inputs before scoring (SVM only).
    pub standardizer: Option<Standardizer>,
    pub params: ModelParams,
}

impl TrainedModel {
    pub fn dimension(&self) -> usize {
        self.layout.len()
    }

    /// Feature groups the model was trained on, in layout order.
    pub fn groups(&self) -> Vec<FeatureGroup> {
        let mut g = self.layout.groups.clone();
        g.dedup();
        g
    }

    pub fn threshold(&self) -> f64 {
        self.kind.threshold()
    }

    pub fn score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                actual: x.len(),
            });
        }
        let s = match &self.params {
            ModelParams::Svm(m) => match &self.standardizer {
                Some(st) => m.decision(&st.transform(x)),
                None => m.decision(x),
            },
            ModelParams::Tree(t) => t.score(x),
            ModelParams::Forest(f) => f.score(x),
        };
        Ok(s)
    }

    pub fn score_all(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        xs.iter().map(|x| self.score(x)).collect()
    }

    pub fn predict(&self, x: &[f64]) -> Result<bool> {
        Ok(self.score(x)? >= self.threshold())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<TrainedModel> {
        let model: TrainedModel = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported model format version {}",
                model.format_version
            )));
        }
        if model.layout.groups.len() != model.layout.names.len() {
            return Err(Error::ModelFormat("feature names and groups differ in length".into()));
        }
        Ok(model)
    }
}

/// Train one classifier on rows laid out by `layout`.
pub fn train(
    kind: ModelKind,
    xs: &[Vec<f64>],
    ys: &[bool],
    layout: &FeatureLayout,
    config: &ClassifierConfig,
) -> Result<TrainedModel> {
    check_training_set(xs, ys)?;
    if xs[0].len() != layout.len() {
        return Err(Error::DimensionMismatch {
            expected: layout.len(),
            actual: xs[0].len(),
        });
    }
    let (standardizer, params) = match kind {
        ModelKind::Svm => {
            let st = Standardizer::fit(xs, &layout.groups)?;
            let scaled: Vec<Vec<f64>> = xs.iter().map(|x| st.transform(x)).collect();
            (Some(st), ModelParams::Svm(train_svm(&scaled, ys, &config.svm)?))
        }
        ModelKind::Tree => (None, ModelParams::Tree(train_tree(xs, ys, &config.tree)?)),
        ModelKind::Forest => (None, ModelParams::Forest(train_forest(xs, ys, &config.forest)?)),
    };
    Ok(TrainedModel {
        format_version: MODEL_FORMAT_VERSION,
        kind,
        layout: layout.clone(),
        standardizer,
        params,
    })
}
