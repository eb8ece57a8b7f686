//! Linear SVM trained by stochastic subgradient descent on the regularized
//! hinge loss (Pegasos step sizes), one-vs-rest for more than two classes.

use ndarray::ArrayView1;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Standardizer, TrainingSet};
use crate::error::{Error, Result};
use crate::seed::derive_index;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            lambda: 1e-3,
            epochs: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    scaler: Standardizer,
    /// One weight vector per binary problem; the last entry is the bias.
    /// Two-class models hold a single class-1-vs-0 problem.
    weights: Vec<Vec<f64>>,
    n_classes: usize,
}

impl SvmModel {
    pub fn fit(data: &TrainingSet, config: &SvmConfig) -> Result<SvmModel> {
        if config.lambda.is_nan() || config.lambda <= 0.0 {
            return Err(Error::Config("svm lambda must be positive".into()));
        }
        if config.epochs == 0 {
            return Err(Error::Config("svm epochs must be at least 1".into()));
        }
        data.require_two_classes()?;
        let scaler = Standardizer::fit(&data.x);
        let z = scaler.transform(&data.x);
        let rows: Vec<Vec<f64>> = z
            .rows()
            .into_iter()
            .map(|r| r.iter().copied().chain(std::iter::once(1.0)).collect())
            .collect();
        let problems: Vec<usize> = if data.n_classes == 2 {
            vec![1]
        } else {
            (0..data.n_classes).collect()
        };
        let weights = problems
            .iter()
            .map(|&c| {
                let targets: Vec<f64> = data
                    .y
                    .iter()
                    .map(|&y| if y == c { 1.0 } else { -1.0 })
                    .collect();
                pegasos(&rows, &targets, config, derive_index(config.seed, c as u64))
            })
            .collect();
        Ok(SvmModel {
            scaler,
            weights,
            n_classes: data.n_classes,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// `w·x + b` per class. Two-class models return `[-f, f]`.
    pub fn decision_values(&self, row: ArrayView1<'_, f64>) -> Vec<f64> {
        let z = self.scaler.transform_row(row);
        let f: Vec<f64> = self
            .weights
            .iter()
            .map(|w| {
                let d = w.len() - 1;
                z.iter().zip(&w[..d]).map(|(a, b)| a * b).sum::<f64>() + w[d]
            })
            .collect();
        if self.n_classes == 2 {
            vec![-f[0], f[0]]
        } else {
            f
        }
    }

    /// Logistic (two classes) or softmax (one-vs-rest) squashing of the
    /// decision values. Not calibrated.
    pub fn predict_proba(&self, row: ArrayView1<'_, f64>) -> Vec<f64> {
        let f = self.decision_values(row);
        if self.n_classes == 2 {
            let p = 1.0 / (1.0 + (-f[1]).exp());
            return vec![1.0 - p, p];
        }
        let max = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = f.iter().map(|v| (v - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        exps.into_iter().map(|e| e / sum).collect()
    }

    pub fn predict(&self, row: ArrayView1<'_, f64>) -> usize {
        super::argmax(&self.decision_values(row))
    }
}

/// Returns the average of the iterates over the second half of training.
fn pegasos(rows: &[Vec<f64>], targets: &[f64], config: &SvmConfig, seed: u64) -> Vec<f64> {
    let d = rows[0].len();
    let mut w = vec![0.0; d];
    let mut avg = vec![0.0; d];
    let mut averaged = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut t = 0usize;
    let start_avg = config.epochs / 2;
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (config.lambda * t as f64);
            let x = &rows[i];
            let y = targets[i];
            let margin = y * x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
            let shrink = 1.0 - eta * config.lambda;
            for wj in w.iter_mut() {
                *wj *= shrink;
            }
            if margin < 1.0 {
                for (wj, xj) in w.iter_mut().zip(x) {
                    *wj += eta * y * xj;
                }
            }
            if epoch >= start_avg {
                averaged += 1;
                for (a, wj) in avg.iter_mut().zip(&w) {
                    *a += wj;
                }
            }
        }
    }
    let n = averaged.max(1) as f64;
    avg.iter().map(|a| a / n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn two_points() {
        let data = TrainingSet::unnamed(array![[-1.0, 0.0], [1.0, 0.0]], vec![0, 1], 2).unwrap();
        let m = SvmModel::fit(&data, &SvmConfig::default()).unwrap();
        assert_eq!(m.predict(data.x.row(0)), 0);
        assert_eq!(m.predict(data.x.row(1)), 1);
    }

    #[test]
    fn lambda_must_be_positive() {
        let data = TrainingSet::unnamed(array![[-1.0], [1.0]], vec![0, 1], 2).unwrap();
        let cfg = SvmConfig {
            lambda: 0.0,
            ..Default::default()
        };
        assert!(matches!(SvmModel::fit(&data, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn single_class_rejected() {
        let data = TrainingSet::unnamed(array![[-1.0], [1.0]], vec![0, 0], 2).unwrap();
        assert!(matches!(
            SvmModel::fit(&data, &SvmConfig::default()),
            Err(Error::SingleClass)
        ));
    }
}
