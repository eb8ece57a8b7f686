use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{Model, ModelConfig, TrainingSet};
use crate::data::FeatureMatrix;
use crate::error::{Error, Result};
use crate::seed;

/// Area under the ROC curve as the Mann–Whitney statistic with midranks for ties.
///
/// Ranks are kept doubled so the numerator is an exact integer.
pub fn auc(scores: &[f64], positive: &[bool]) -> Result<f64> {
    if scores.len() != positive.len() {
        return Err(Error::Matrix(format!(
            "{} scores but {} labels",
            scores.len(),
            positive.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite);
    }
    let n_pos = positive.iter().filter(|&&p| p).count() as u128;
    let n_neg = positive.len() as u128 - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum2: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // Positions i+1..=j share the midrank (i + 1 + j) / 2.
        let doubled = (i + 1 + j) as u128;
        rank_sum2 += doubled * order[i..j].iter().filter(|&&k| positive[k]).count() as u128;
        i = j;
    }
    let u2 = rank_sum2 - n_pos * (n_pos + 1);
    Ok(u2 as f64 / (2 * n_pos * n_neg) as f64)
}

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn new(n_classes: usize) -> Self {
        ConfusionMatrix {
            counts: vec![vec![0; n_classes]; n_classes],
        }
    }

    pub fn from_predictions(n_classes: usize, truth: &[usize], predicted: &[usize]) -> Self {
        let mut m = ConfusionMatrix::new(n_classes);
        for (&t, &p) in truth.iter().zip(predicted) {
            m.counts[t][p] += 1;
        }
        m
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn support(&self, class: usize) -> usize {
        self.counts[class].iter().sum()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    /// Zero when nothing was predicted as `class`.
    pub fn precision(&self, class: usize) -> f64 {
        let predicted: usize = self.counts.iter().map(|r| r[class]).sum();
        ratio(self.counts[class][class], predicted)
    }

    /// Zero when `class` has no members.
    pub fn recall(&self, class: usize) -> f64 {
        ratio(self.counts[class][class], self.support(class))
    }

    pub fn accuracy(&self) -> f64 {
        let correct: usize = (0..self.counts.len()).map(|c| self.counts[c][c]).sum();
        ratio(correct, self.total())
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Fold index for every sample. Each class is shuffled and dealt round-robin,
/// continuing where the previous class stopped, so per-fold class counts
/// differ by at most one.
pub fn stratified_folds(
    labels: &[usize],
    n_classes: usize,
    folds: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::Config("at least two folds are required".into()));
    }
    let mut rng = seed::rng(seed, "cv/folds");
    let mut assignment = vec![0; labels.len()];
    let mut offset = 0;
    for class in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < folds {
            return Err(Error::ClassTooSmall {
                class,
                size: members.len(),
                folds,
            });
        }
        members.shuffle(&mut rng);
        for (p, &i) in members.iter().enumerate() {
            assignment[i] = (offset + p) % folds;
        }
        offset += members.len();
    }
    Ok(assignment)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub accuracy: f64,
    pub test_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: String,
    pub classes: Vec<String>,
    pub folds: usize,
    pub samples: usize,
    /// Per-class precision averaged over folds.
    pub precision: Vec<f64>,
    /// Per-class recall averaged over folds.
    pub recall: Vec<f64>,
    /// Accuracy averaged over folds.
    pub accuracy: f64,
    /// Pooled out-of-fold AUC for class 1; binary tasks only.
    pub auc: Option<f64>,
    /// Pooled over all folds.
    pub confusion: ConfusionMatrix,
    pub per_fold: Vec<FoldReport>,
}

impl EvalReport {
    pub fn with_labels(mut self, task: &str, classes: &[&str]) -> Self {
        self.task = task.to_string();
        if classes.len() == self.classes.len() {
            self.classes = classes.iter().map(|s| s.to_string()).collect();
        }
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<EvalReport> {
        Ok(serde_json::from_str(text)?)
    }

    /// Plain-text table: one line per class plus accuracy and AUC.
    pub fn summary(&self) -> String {
        let mut out = format!(
            "{} ({} samples, {}-fold)\n",
            self.task, self.samples, self.folds
        );
        out.push_str("class        precision  recall  support\n");
        for (c, name) in self.classes.iter().enumerate() {
            out.push_str(&format!(
                "{:<12} {:>9.3} {:>7.3} {:>8}\n",
                name,
                self.precision[c],
                self.recall[c],
                self.confusion.support(c)
            ));
        }
        out.push_str(&format!("accuracy     {:.3}\n", self.accuracy));
        if let Some(a) = self.auc {
            out.push_str(&format!("auc          {a:.3}\n"));
        }
        out
    }
}

/// Stratified k-fold cross-validation. Each fold's model is seeded from the
/// configured seed and the fold index.
pub fn cross_validate(
    data: &TrainingSet,
    model: &ModelConfig,
    folds: usize,
    seed: u64,
) -> Result<EvalReport> {
    data.require_two_classes()?;
    let assignment = stratified_folds(&data.y, data.n_classes, folds, seed)?;
    let k = data.n_classes;
    let mut pooled = ConfusionMatrix::new(k);
    let mut per_fold = Vec::with_capacity(folds);
    let mut oof_scores = vec![0.0; data.len()];
    for f in 0..folds {
        let train: Vec<usize> = (0..data.len()).filter(|&i| assignment[i] != f).collect();
        let test: Vec<usize> = (0..data.len()).filter(|&i| assignment[i] == f).collect();
        let fitted = model
            .reseeded(seed::derive_index(model.seed(), f as u64))
            .fit(&data.subset(&train))?;
        let mut predicted = Vec::with_capacity(test.len());
        for &i in &test {
            let scores = fitted.scores(data.x.row(i));
            if k == 2 {
                oof_scores[i] = scores[1];
            }
            predicted.push(super::argmax(&scores));
        }
        let truth: Vec<usize> = test.iter().map(|&i| data.y[i]).collect();
        let cm = ConfusionMatrix::from_predictions(k, &truth, &predicted);
        per_fold.push(FoldReport {
            precision: (0..k).map(|c| cm.precision(c)).collect(),
            recall: (0..k).map(|c| cm.recall(c)).collect(),
            accuracy: cm.accuracy(),
            test_size: test.len(),
        });
        pooled.add(&cm);
    }
    let mean =
        |get: &dyn Fn(&FoldReport) -> f64| per_fold.iter().map(get).sum::<f64>() / folds as f64;
    let auc = if k == 2 {
        let positive: Vec<bool> = data.y.iter().map(|&y| y == 1).collect();
        Some(auc(&oof_scores, &positive)?)
    } else {
        None
    };
    Ok(EvalReport {
        task: String::new(),
        classes: (0..k).map(|c| c.to_string()).collect(),
        folds,
        samples: data.len(),
        precision: (0..k)
            .map(|c| mean(&|r: &FoldReport| r.precision[c]))
            .collect(),
        recall: (0..k)
            .map(|c| mean(&|r: &FoldReport| r.recall[c]))
            .collect(),
        accuracy: mean(&|r: &FoldReport| r.accuracy),
        auc,
        confusion: pooled,
        per_fold,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredUser {
    pub user_id: String,
    pub site: String,
    pub probability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SiteCount {
    pub users: usize,
    pub labeled: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub confidence: f64,
    pub scored_users: usize,
    pub labeled: Vec<ScoredUser>,
    pub per_site: BTreeMap<String, SiteCount>,
}

/// Labels every user whose class-1 probability is at least `confidence`.
pub fn score_corpus(
    model: &Model,
    features: &FeatureMatrix,
    confidence: f64,
    site_of: &dyn Fn(&str) -> String,
) -> ScoreReport {
    let mut labeled = Vec::new();
    let mut per_site: BTreeMap<String, SiteCount> = BTreeMap::new();
    for (i, user) in features.users().iter().enumerate() {
        let site = site_of(user);
        let p = model.predict_proba(features.row(i))[1];
        let entry = per_site.entry(site.clone()).or_default();
        entry.users += 1;
        if p >= confidence {
            entry.labeled += 1;
            labeled.push(ScoredUser {
                user_id: user.clone(),
                site,
                probability: p,
            });
        }
    }
    ScoreReport {
        confidence,
        scored_users: features.nrows(),
        labeled,
        per_site,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auc_cases() {
        let labels = [false, false, true, true];
        assert_eq!(auc(&[0.0, 0.0, 1.0, 1.0], &labels).unwrap(), 1.0);
        assert_eq!(auc(&[0.3; 4], &labels).unwrap(), 0.5);
        // Pairs (pos, neg): (0.35,0.1) ok, (0.35,0.4) wrong, (0.8,0.1) ok, (0.8,0.4) ok.
        assert_eq!(auc(&[0.1, 0.4, 0.35, 0.8], &labels).unwrap(), 0.75);
        assert!(matches!(
            auc(&[0.1, 0.2], &[true, true]),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn precision_recall_from_matrix() {
        let m = ConfusionMatrix {
            counts: vec![vec![5, 1], vec![2, 8]],
        };
        assert_eq!(m.precision(1), 8.0 / 9.0);
        assert_eq!(m.recall(1), 0.8);
        assert_eq!(m.precision(0), 5.0 / 7.0);
        assert_eq!(m.recall(0), 5.0 / 6.0);
        assert_eq!(m.accuracy(), 13.0 / 16.0);
        assert_eq!(ConfusionMatrix::new(2).precision(0), 0.0);
    }

    #[test]
    fn folds_are_stratified() {
        let labels: Vec<usize> = (0..53).map(|i| usize::from(i % 4 == 0)).collect();
        let folds = stratified_folds(&labels, 2, 10, 1).unwrap();
        for class in 0..2 {
            let total = labels.iter().filter(|&&l| l == class).count();
            for f in 0..10 {
                let n = (0..labels.len())
                    .filter(|&i| folds[i] == f && labels[i] == class)
                    .count();
                assert!((n as f64 - total as f64 / 10.0).abs() <= 1.0);
            }
        }
    }

    #[test]
    fn small_class_rejected() {
        let labels = [0, 0, 0, 1];
        assert!(matches!(
            stratified_folds(&labels, 2, 3, 0),
            Err(Error::ClassTooSmall {
                class: 1,
                size: 1,
                folds: 3
            })
        ));
    }
}
