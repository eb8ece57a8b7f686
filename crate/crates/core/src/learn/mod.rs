//! Classifiers and their evaluation.

mod eval;
mod forest;
mod scale;
mod svm;

use std::path::Path;

use ndarray::{Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

pub use eval::{
    auc, cross_validate, score_corpus, stratified_folds, ConfusionMatrix, EvalReport, FoldReport,
    ScoreReport, ScoredUser, SiteCount,
};
pub use forest::{ForestConfig, ForestModel};
pub use scale::Standardizer;
pub use svm::{SvmConfig, SvmModel};

use crate::data::{write_file, FeatureMatrix};
use crate::error::{Error, Result};

/// Feature rows with integer class labels `0..n_classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub x: Array2<f64>,
    pub y: Vec<usize>,
    pub feature_names: Vec<String>,
    pub n_classes: usize,
}

impl TrainingSet {
    pub fn new(
        x: Array2<f64>,
        y: Vec<usize>,
        feature_names: Vec<String>,
        n_classes: usize,
    ) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::Matrix(format!(
                "{} rows but {} labels",
                x.nrows(),
                y.len()
            )));
        }
        if x.ncols() != feature_names.len() {
            return Err(Error::Matrix(format!(
                "{} columns but {} feature names",
                x.ncols(),
                feature_names.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
            return Err(Error::Matrix(format!("label {bad} outside 0..{n_classes}")));
        }
        Ok(TrainingSet {
            x,
            y,
            feature_names,
            n_classes,
        })
    }

    /// Generic `f0, f1, ...` names.
    pub fn unnamed(x: Array2<f64>, y: Vec<usize>, n_classes: usize) -> Result<Self> {
        let names = (0..x.ncols()).map(|j| format!("f{j}")).collect();
        TrainingSet::new(x, y, names, n_classes)
    }

    pub fn from_matrix(m: &FeatureMatrix, y: Vec<usize>, n_classes: usize) -> Result<Self> {
        TrainingSet::new(m.values().clone(), y, m.names().to_vec(), n_classes)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &c in &self.y {
            counts[c] += 1;
        }
        counts
    }

    pub(crate) fn require_two_classes(&self) -> Result<()> {
        if self.class_counts().iter().filter(|&&c| c > 0).count() < 2 {
            return Err(Error::SingleClass);
        }
        Ok(())
    }

    pub fn subset(&self, rows: &[usize]) -> TrainingSet {
        TrainingSet {
            x: self.x.select(Axis(0), rows),
            y: rows.iter().map(|&i| self.y[i]).collect(),
            feature_names: self.feature_names.clone(),
            n_classes: self.n_classes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelConfig {
    Forest(ForestConfig),
    Svm(SvmConfig),
}

impl ModelConfig {
    pub fn fit(&self, data: &TrainingSet) -> Result<Model> {
        match self {
            ModelConfig::Forest(c) => ForestModel::fit(data, c).map(Model::Forest),
            ModelConfig::Svm(c) => SvmModel::fit(data, c).map(Model::Svm),
        }
    }

    /// Same model family with a different seed.
    pub fn reseeded(&self, seed: u64) -> ModelConfig {
        match self {
            ModelConfig::Forest(c) => ModelConfig::Forest(ForestConfig { seed, ..c.clone() }),
            ModelConfig::Svm(c) => ModelConfig::Svm(SvmConfig { seed, ..c.clone() }),
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            ModelConfig::Forest(c) => c.seed,
            ModelConfig::Svm(c) => c.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Model {
    Forest(ForestModel),
    Svm(SvmModel),
}

const MODEL_FORMAT: &str = "trollspot-model";
const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct SavedModel {
    format: String,
    version: u32,
    model: Model,
}

impl Model {
    pub fn n_classes(&self) -> usize {
        match self {
            Model::Forest(m) => m.n_classes(),
            Model::Svm(m) => m.n_classes(),
        }
    }

    /// Ranking scores per class: vote fractions for forests, decision values for SVMs.
    pub fn scores(&self, row: ArrayView1<'_, f64>) -> Vec<f64> {
        match self {
            Model::Forest(m) => m.predict_proba(row),
            Model::Svm(m) => m.decision_values(row),
        }
    }

    pub fn predict_proba(&self, row: ArrayView1<'_, f64>) -> Vec<f64> {
        match self {
            Model::Forest(m) => m.predict_proba(row),
            Model::Svm(m) => m.predict_proba(row),
        }
    }

    pub fn predict(&self, row: ArrayView1<'_, f64>) -> usize {
        argmax(&self.scores(row))
    }

    pub fn to_json(&self) -> Result<String> {
        let saved = SavedModel {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            model: self.clone(),
        };
        Ok(serde_json::to_string_pretty(&saved)?)
    }

    pub fn from_json(text: &str) -> Result<Model> {
        let saved: SavedModel = serde_json::from_str(text)?;
        if saved.format != MODEL_FORMAT || saved.version != MODEL_VERSION {
            return Err(Error::Model(format!(
                "unsupported model file {} v{}",
                saved.format, saved.version
            )));
        }
        Ok(saved.model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), self.to_json()?.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Model> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Model::from_json(&text)
    }
}

/// Index of the largest value; the first one on ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}
