//! Random forest of Gini-split classification trees.
//!
//! Candidate features at each node are drawn by ranking every feature on a
//! key mixed from the node's random draw and a hash of the feature *name*,
//! so a tree does not change when the columns are permuted.

use ndarray::ArrayView1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::TrainingSet;
use crate::error::{Error, Result};
use crate::seed::{derive_index, fnv1a, splitmix64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Candidate features per split; `floor(sqrt(d))` when unset.
    pub max_features: Option<usize>,
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_features: None,
            min_leaf: 1,
            max_depth: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestConfig {
    fn resolved_max_features(&self, d: usize) -> Result<usize> {
        let m = self
            .max_features
            .unwrap_or_else(|| ((d as f64).sqrt().floor() as usize).max(1));
        if m == 0 || m > d {
            return Err(Error::Config(format!("max_features {m} outside 1..={d}")));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "t")]
enum Node {
    Leaf {
        class: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, row: ArrayView1<'_, f64>) -> usize {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { class } => return class,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[feature] <= threshold {
                        left
                    } else {
                        right
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    config: ForestConfig,
    n_classes: usize,
    feature_names: Vec<String>,
    trees: Vec<Tree>,
}

impl ForestModel {
    pub fn fit(data: &TrainingSet, config: &ForestConfig) -> Result<ForestModel> {
        if config.n_trees == 0 {
            return Err(Error::Config("n_trees must be at least 1".into()));
        }
        if config.min_leaf == 0 {
            return Err(Error::Config("min_leaf must be at least 1".into()));
        }
        data.require_two_classes()?;
        let mtry = config.resolved_max_features(data.x.ncols())?;
        let name_hashes: Vec<u64> = data
            .feature_names
            .iter()
            .map(|n| fnv1a(n.as_bytes()))
            .collect();
        let trees = (0..config.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_index(config.seed, t as u64));
                let n = data.len();
                let rows: Vec<usize> = if config.bootstrap {
                    (0..n).map(|_| rng.gen_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                TreeBuilder {
                    data,
                    config,
                    mtry,
                    name_hashes: &name_hashes,
                    rng,
                    nodes: Vec::new(),
                }
                .build(rows)
            })
            .collect();
        Ok(ForestModel {
            config: config.clone(),
            n_classes: data.n_classes,
            feature_names: data.feature_names.clone(),
            trees,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Fraction of trees voting for each class.
    pub fn predict_proba(&self, row: ArrayView1<'_, f64>) -> Vec<f64> {
        let mut votes = vec![0usize; self.n_classes];
        for tree in &self.trees {
            votes[tree.predict(row)] += 1;
        }
        let n = self.trees.len() as f64;
        votes.into_iter().map(|v| v as f64 / n).collect()
    }

    pub fn predict(&self, row: ArrayView1<'_, f64>) -> usize {
        super::argmax(&self.predict_proba(row))
    }

    /// Per-tree class predictions, in tree order.
    pub fn tree_votes(&self, row: ArrayView1<'_, f64>) -> Vec<usize> {
        self.trees.iter().map(|t| t.predict(row)).collect()
    }
}

struct TreeBuilder<'a> {
    data: &'a TrainingSet,
    config: &'a ForestConfig,
    mtry: usize,
    name_hashes: &'a [u64],
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

struct BestSplit {
    impurity: f64,
    feature: usize,
    threshold: f64,
}

impl TreeBuilder<'_> {
    fn build(mut self, rows: Vec<usize>) -> Tree {
        self.grow(rows, 0);
        Tree { nodes: self.nodes }
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        let counts = self.class_counts(&rows);
        let majority = counts
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map_or(0, |(c, _)| c);
        self.nodes.push(Node::Leaf { class: majority });

        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let too_deep = self.config.max_depth.is_some_and(|m| depth >= m);
        if pure || too_deep || rows.len() < 2 * self.config.min_leaf {
            return id;
        }
        let Some(best) = self.best_split(&rows) else {
            return id;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&r| self.data.x[[r, best.feature]] <= best.threshold);
        let left = self.grow(left_rows, depth + 1);
        let right = self.grow(right_rows, depth + 1);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }

    fn class_counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.data.n_classes];
        for &r in rows {
            counts[self.data.y[r]] += 1;
        }
        counts
    }

    /// Scans features in name-keyed random order until `mtry` non-constant
    /// ones have been evaluated.
    fn best_split(&mut self, rows: &[usize]) -> Option<BestSplit> {
        let node_key: u64 = self.rng.gen();
        let mut order: Vec<usize> = (0..self.data.x.ncols()).collect();
        order.sort_by_key(|&f| {
            (
                splitmix64(node_key ^ self.name_hashes[f]),
                &self.data.feature_names[f],
            )
        });

        let mut best: Option<BestSplit> = None;
        let mut informative = 0;
        for f in order {
            if informative >= self.mtry {
                break;
            }
            if let Some((impurity, threshold)) = self.best_threshold(rows, f) {
                informative += 1;
                if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                    best = Some(BestSplit {
                        impurity,
                        feature: f,
                        threshold,
                    });
                }
            }
        }
        best
    }

    /// Lowest weighted Gini (times node size) over thresholds of feature `f`.
    /// `None` when the feature is constant or no split honors `min_leaf`.
    fn best_threshold(&self, rows: &[usize], f: usize) -> Option<(f64, f64)> {
        let k = self.data.n_classes;
        let mut pairs: Vec<(f64, usize)> = rows
            .iter()
            .map(|&r| (self.data.x[[r, f]], self.data.y[r]))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pairs.first()?.0 == pairs.last()?.0 {
            return None;
        }
        let n = pairs.len();
        let mut right = vec![0usize; k];
        for &(_, c) in &pairs {
            right[c] += 1;
        }
        let mut left = vec![0usize; k];
        let min_leaf = self.config.min_leaf;
        let mut best: Option<(f64, f64)> = None;
        for i in 0..n - 1 {
            let c = pairs[i].1;
            left[c] += 1;
            right[c] -= 1;
            let (a, b) = (pairs[i].0, pairs[i + 1].0);
            let nl = i + 1;
            let nr = n - nl;
            if a == b || nl < min_leaf || nr < min_leaf {
                continue;
            }
            let impurity = gini_mass(&left, nl) + gini_mass(&right, nr);
            if best.is_none_or(|(bi, _)| impurity < bi) {
                let mid = a + (b - a) / 2.0;
                let threshold = if mid < b { mid } else { a };
                best = Some((impurity, threshold));
            }
        }
        best
    }
}

/// `n * gini` for a node holding `n` samples with the given class counts.
fn gini_mass(counts: &[usize], n: usize) -> f64 {
    let sq: usize = counts.iter().map(|c| c * c).sum();
    n as f64 - sq as f64 / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn full_tree_memorizes() {
        let x = array![
            [0.0, 1.0],
            [1.0, 1.0],
            [0.0, 0.0],
            [1.0, 0.0],
            [0.5, 0.5],
            [0.2, 0.9]
        ];
        let y = vec![0, 1, 1, 0, 1, 0];
        let data = TrainingSet::unnamed(x, y.clone(), 2).unwrap();
        let cfg = ForestConfig {
            n_trees: 1,
            max_features: Some(2),
            bootstrap: false,
            ..Default::default()
        };
        let model = ForestModel::fit(&data, &cfg).unwrap();
        for (i, &label) in y.iter().enumerate() {
            assert_eq!(model.predict(data.x.row(i)), label);
        }
    }

    #[test]
    fn single_class_rejected() {
        let data = TrainingSet::unnamed(array![[0.0], [1.0]], vec![1, 1], 2).unwrap();
        assert!(matches!(
            ForestModel::fit(&data, &ForestConfig::default()),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn gini_mass_values() {
        assert_eq!(gini_mass(&[2, 0], 2), 0.0);
        assert_eq!(gini_mass(&[1, 1], 2), 1.0);
    }

    #[test]
    fn max_features_bounds() {
        let data = TrainingSet::unnamed(Array2::zeros((2, 3)), vec![0, 1], 2).unwrap();
        let cfg = ForestConfig {
            max_features: Some(4),
            ..Default::default()
        };
        assert!(matches!(
            ForestModel::fit(&data, &cfg),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn depth_limit_gives_stumps() {
        let x = array![[0.0], [1.0], [2.0], [3.0]];
        let data = TrainingSet::unnamed(x, vec![0, 1, 0, 1], 2).unwrap();
        let cfg = ForestConfig {
            n_trees: 1,
            max_depth: Some(1),
            bootstrap: false,
            ..Default::default()
        };
        let model = ForestModel::fit(&data, &cfg).unwrap();
        assert!(model.trees[0].nodes.len() <= 3);
    }
}
