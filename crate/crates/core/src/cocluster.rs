//! Sparse nonnegative co-clustering of a users × features matrix.
//!
//! Minimizes `‖X − A Bᵀ‖²_F + λ ΣA + λ ΣB` over `A, B ≥ 0` by alternating
//! exact coordinate descent: with `B` fixed each column of `A` has a closed
//! form soft-thresholded solution, and symmetrically for `B`. Every column
//! update is an exact minimization, so the objective never increases.
//!
//! Each column `r` is a latent behavior: the users with `A(i, r)` above the
//! membership threshold, exhibiting the features with `B(j, r)` above it.

use std::path::Path;

use ndarray::{Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{write_file, FeatureMatrix};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoclusterConfig {
    pub rank: usize,
    pub lambda: f64,
    pub max_iters: usize,
    /// Stop once the relative objective decrease falls below this.
    pub tol: f64,
    pub restarts: usize,
    /// Absolute membership threshold; `1e-6 · max` of the factor when unset.
    pub membership_threshold: Option<f64>,
    pub seed: u64,
}

impl Default for CoclusterConfig {
    fn default() -> Self {
        CoclusterConfig {
            rank: 8,
            lambda: 1.0,
            max_iters: 500,
            tol: 1e-7,
            restarts: 5,
            membership_threshold: None,
            seed: 0,
        }
    }
}

impl CoclusterConfig {
    fn validate(&self) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::Config("rank must be at least 1".into()));
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::Config("lambda must be a nonnegative number".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Config("tol must be positive".into()));
        }
        if self
            .membership_threshold
            .is_some_and(|t| t.is_nan() || t < 0.0)
        {
            return Err(Error::Config(
                "membership threshold must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoclusterModel {
    /// Users × rank memberships.
    pub a: Array2<f64>,
    /// Features × rank loadings.
    pub b: Array2<f64>,
    pub lambda: f64,
    /// Objective after initialization and after every sweep of the kept restart.
    pub objective_trace: Vec<f64>,
    pub membership_threshold: Option<f64>,
}

pub fn objective(x: &Array2<f64>, a: &Array2<f64>, b: &Array2<f64>, lambda: f64) -> f64 {
    let residual = x - &a.dot(&b.t());
    residual.iter().map(|v| v * v).sum::<f64>() + lambda * (a.sum() + b.sum())
}

/// Z-scores every column (constant columns become zero), then shifts each
/// column so that its minimum is zero.
pub fn preprocess(x: &Array2<f64>) -> Array2<f64> {
    let mut out = zscore(x);
    for mut col in out.axis_iter_mut(Axis(1)) {
        let min = col.iter().copied().fold(f64::INFINITY, f64::min);
        if min.is_finite() {
            col.mapv_inplace(|v| v - min);
        }
    }
    out
}

fn zscore(x: &Array2<f64>) -> Array2<f64> {
    let mut out = x.clone();
    let n = x.nrows().max(1) as f64;
    for mut col in out.axis_iter_mut(Axis(1)) {
        let mean = col.sum() / n;
        let sd = (col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
        if sd > 0.0 {
            col.mapv_inplace(|v| (v - mean) / sd);
        } else {
            col.fill(0.0);
        }
    }
    out
}

pub fn fit(x: &Array2<f64>, config: &CoclusterConfig) -> Result<CoclusterModel> {
    config.validate()?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let max_rank = x.nrows().min(x.ncols());
    if config.rank > max_rank {
        return Err(Error::InvalidRank {
            rank: config.rank,
            max: max_rank,
        });
    }
    let mut best: Option<CoclusterModel> = None;
    for restart in 0..config.restarts.max(1) {
        let model = fit_once(x, config, restart as u64);
        let better = match &best {
            None => true,
            Some(b) => model.final_objective() < b.final_objective(),
        };
        if better {
            best = Some(model);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn fit_once(x: &Array2<f64>, config: &CoclusterConfig, restart: u64) -> CoclusterModel {
    let (n, m, r) = (x.nrows(), x.ncols(), config.rank);
    let mean = x.sum() / (n * m) as f64;
    let scale = (mean.max(0.0) / r as f64).sqrt();
    let mut rng = seed::rng(seed::derive_index(config.seed, restart), "cocluster/init");
    let mut a = Array2::from_shape_fn((n, r), |_| rng.gen::<f64>() * scale);
    let mut b = Array2::from_shape_fn((m, r), |_| rng.gen::<f64>() * scale);
    let lambda = config.lambda;
    let xt = x.t().to_owned();

    let mut trace = vec![objective(x, &a, &b, lambda)];
    for _ in 0..config.max_iters {
        update_factor(x, &mut a, &b, lambda);
        update_factor(&xt, &mut b, &a, lambda);
        let obj = objective(x, &a, &b, lambda);
        let prev = *trace.last().expect("trace starts nonempty");
        trace.push(obj);
        if prev <= 0.0 || (prev - obj) / prev < config.tol {
            break;
        }
    }
    CoclusterModel {
        a,
        b,
        lambda,
        objective_trace: trace,
        membership_threshold: config.membership_threshold,
    }
}

/// Exact coordinate minimization of `‖X − F Gᵀ‖² + λ ΣF` over each column of
/// `F` in turn, with `G` fixed.
fn update_factor(x: &Array2<f64>, f: &mut Array2<f64>, g: &Array2<f64>, lambda: f64) {
    let xg = x.dot(g);
    let gram = g.t().dot(g);
    let rank = f.ncols();
    for r in 0..rank {
        let norm = gram[[r, r]];
        if norm <= 0.0 {
            f.column_mut(r).fill(0.0);
            continue;
        }
        for i in 0..f.nrows() {
            let mut num = xg[[i, r]];
            for s in 0..rank {
                if s != r {
                    num -= f[[i, s]] * gram[[s, r]];
                }
            }
            f[[i, r]] = ((num - lambda / 2.0) / norm).max(0.0);
        }
    }
}

impl CoclusterModel {
    pub fn rank(&self) -> usize {
        self.a.ncols()
    }

    pub fn final_objective(&self) -> f64 {
        *self.objective_trace.last().unwrap_or(&f64::INFINITY)
    }

    fn threshold(&self, factor: &Array2<f64>) -> f64 {
        self.membership_threshold
            .unwrap_or_else(|| 1e-6 * factor.iter().copied().fold(0.0, f64::max))
    }

    pub fn user_threshold(&self) -> f64 {
        self.threshold(&self.a)
    }

    pub fn feature_threshold(&self) -> f64 {
        self.threshold(&self.b)
    }

    /// Users whose membership in cluster `r` exceeds the threshold.
    pub fn members(&self, r: usize) -> Vec<usize> {
        let t = self.user_threshold();
        (0..self.a.nrows())
            .filter(|&i| self.a[[i, r]] > t)
            .collect()
    }

    pub fn active_features(&self, r: usize) -> Vec<usize> {
        let t = self.feature_threshold();
        (0..self.b.nrows())
            .filter(|&j| self.b[[j, r]] > t)
            .collect()
    }

    /// Clusters with no member users or no active features.
    pub fn empty_clusters(&self) -> Vec<usize> {
        (0..self.rank())
            .filter(|&r| self.members(r).is_empty() || self.active_features(r).is_empty())
            .collect()
    }

    pub fn all_empty(&self) -> bool {
        self.empty_clusters().len() == self.rank()
    }

    pub fn nonzeros(&self) -> usize {
        self.a
            .iter()
            .chain(self.b.iter())
            .filter(|&&v| v > 0.0)
            .count()
    }

    pub fn relative_residual(&self, x: &Array2<f64>) -> f64 {
        let residual = x - &self.a.dot(&self.b.t());
        let num = residual.iter().map(|v| v * v).sum::<f64>().sqrt();
        let den = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }

    pub fn factor_csv(factor: &Array2<f64>, first: &str, labels: &[String]) -> Result<Vec<u8>> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let mut header = vec![first.to_string()];
        header.extend((0..factor.ncols()).map(|r| format!("c{r}")));
        wtr.write_record(&header)?;
        for (label, row) in labels.iter().zip(factor.rows()) {
            let mut rec = vec![label.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            wtr.write_record(&rec)?;
        }
        wtr.into_inner().map_err(|e| Error::Matrix(e.to_string()))
    }

    /// Writes `A.csv` (users) and `B.csv` (features) into `dir`.
    pub fn export(
        &self,
        dir: impl AsRef<Path>,
        users: &[String],
        features: &[String],
    ) -> Result<()> {
        let dir = dir.as_ref();
        write_file(
            &dir.join("A.csv"),
            &Self::factor_csv(&self.a, "user_id", users)?,
        )?;
        write_file(
            &dir.join("B.csv"),
            &Self::factor_csv(&self.b, "feature", features)?,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankSelection {
    pub rank: usize,
    pub model: CoclusterModel,
    /// Set when even a single cluster comes back empty.
    pub degenerate: bool,
    /// `(rank, number of empty clusters)` for every rank tried.
    pub tried: Vec<(usize, usize)>,
}

/// Fits ranks 1, 2, ... and stops at the first rank that produces an empty
/// cluster, returning the last rank without one (1 at minimum).
pub fn select_rank(
    x: &Array2<f64>,
    config: &CoclusterConfig,
    max_rank: usize,
) -> Result<RankSelection> {
    let cap = max_rank.max(1).min(x.nrows().min(x.ncols()).max(1));
    let mut tried = Vec::new();
    let mut chosen: Option<(usize, CoclusterModel)> = None;
    for rank in 1..=cap {
        let model = fit(
            x,
            &CoclusterConfig {
                rank,
                ..config.clone()
            },
        )?;
        let empty = model.empty_clusters().len();
        tried.push((rank, empty));
        if empty > 0 {
            if chosen.is_none() {
                return Ok(RankSelection {
                    rank: 1,
                    model,
                    degenerate: true,
                    tried,
                });
            }
            break;
        }
        chosen = Some((rank, model));
    }
    let (rank, model) = chosen.expect("rank 1 either succeeded or returned early");
    Ok(RankSelection {
        rank,
        model,
        degenerate: false,
        tried,
    })
}

/// Memberships as features, one row per matrix row.
pub fn latent_features(model: &CoclusterModel) -> Array2<f64> {
    model.a.clone()
}

pub fn latent_feature_matrix(model: &CoclusterModel, users: &[String]) -> Result<FeatureMatrix> {
    let names = (0..model.rank()).map(|r| format!("latent_{r}")).collect();
    FeatureMatrix::new(users.to_vec(), names, latent_features(model))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureContrast {
    pub feature: String,
    /// Mean z-score among cluster members.
    pub member_mean: f64,
    /// Mean z-score among everyone else.
    pub other_mean: f64,
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub cluster: usize,
    pub members: usize,
    pub misbehaving_fraction: Option<f64>,
    pub active_features: Vec<String>,
    pub top_features: Vec<FeatureContrast>,
}

/// Per-cluster summary: size, share of misbehaving members when labels are
/// given, and the `top` features most elevated among members relative to
/// non-members, in z-score units.
pub fn interpret(
    model: &CoclusterModel,
    x: &Array2<f64>,
    feature_names: &[String],
    misbehaving: Option<&[bool]>,
    top: usize,
) -> Vec<ClusterReport> {
    let z = zscore(x);
    (0..model.rank())
        .map(|r| {
            let members = model.members(r);
            let mut is_member = vec![false; x.nrows()];
            for &i in &members {
                is_member[i] = true;
            }
            let mut contrasts: Vec<(usize, FeatureContrast)> = (0..x.ncols())
                .map(|j| {
                    let (mut ms, mut mn, mut os, mut on) = (0.0, 0usize, 0.0, 0usize);
                    for i in 0..x.nrows() {
                        if is_member[i] {
                            ms += z[[i, j]];
                            mn += 1;
                        } else {
                            os += z[[i, j]];
                            on += 1;
                        }
                    }
                    let member_mean = if mn > 0 { ms / mn as f64 } else { 0.0 };
                    let other_mean = if on > 0 { os / on as f64 } else { 0.0 };
                    (
                        j,
                        FeatureContrast {
                            feature: feature_names[j].clone(),
                            member_mean,
                            other_mean,
                            difference: member_mean - other_mean,
                        },
                    )
                })
                .collect();
            contrasts.sort_by(|a, b| {
                b.1.difference
                    .total_cmp(&a.1.difference)
                    .then(a.0.cmp(&b.0))
            });
            contrasts.truncate(top);
            let misbehaving_fraction = misbehaving.filter(|_| !members.is_empty()).map(|labels| {
                members.iter().filter(|&&i| labels[i]).count() as f64 / members.len() as f64
            });
            ClusterReport {
                cluster: r,
                members: members.len(),
                misbehaving_fraction,
                active_features: model
                    .active_features(r)
                    .into_iter()
                    .map(|j| feature_names[j].clone())
                    .collect(),
                top_features: contrasts.into_iter().map(|(_, c)| c).collect(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1};

    #[test]
    fn exact_rank_one() {
        let a = Array1::from(vec![1.0, 2.0, 0.5, 3.0]);
        let b = Array1::from(vec![0.5, 1.5, 2.0]);
        let x = Array2::from_shape_fn((4, 3), |(i, j)| a[i] * b[j]);
        let cfg = CoclusterConfig {
            rank: 1,
            lambda: 0.0,
            max_iters: 2000,
            tol: 1e-15,
            ..Default::default()
        };
        let model = fit(&x, &cfg).unwrap();
        assert!(model.relative_residual(&x) < 1e-6);
    }

    #[test]
    fn zero_matrix_gives_zero_factors() {
        let x = Array2::zeros((5, 4));
        let model = fit(
            &x,
            &CoclusterConfig {
                rank: 2,
                lambda: 0.1,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(model.a.iter().all(|&v| v == 0.0));
        assert!(model.b.iter().all(|&v| v == 0.0));
        assert!(model.all_empty());
    }

    #[test]
    fn input_validation() {
        let x = array![[1.0, f64::NAN]];
        assert!(matches!(
            fit(
                &x,
                &CoclusterConfig {
                    rank: 1,
                    ..Default::default()
                }
            ),
            Err(Error::NonFinite)
        ));
        let x = Array2::ones((3, 2));
        assert!(matches!(
            fit(
                &x,
                &CoclusterConfig {
                    rank: 3,
                    ..Default::default()
                }
            ),
            Err(Error::InvalidRank { rank: 3, max: 2 })
        ));
    }

    #[test]
    fn preprocessing_is_nonnegative_with_zero_minimum() {
        let x = array![[1.0, -4.0, 2.0], [3.0, 0.0, 2.0], [5.0, 8.0, 2.0]];
        let p = preprocess(&x);
        for col in p.axis_iter(Axis(1)) {
            assert_eq!(col.iter().copied().fold(f64::INFINITY, f64::min), 0.0);
        }
        assert!(p.column(2).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn interpretation_ranks_elevated_feature_first() {
        let x = array![[5.0, 1.0], [5.0, 2.0], [0.0, 1.0], [0.0, 2.0]];
        let model = CoclusterModel {
            a: array![[1.0], [1.0], [0.0], [0.0]],
            b: array![[1.0], [0.0]],
            lambda: 0.0,
            objective_trace: vec![0.0],
            membership_threshold: None,
        };
        let names = vec!["caps".to_string(), "len".to_string()];
        let report = interpret(&model, &x, &names, None, 2);
        assert_eq!(report[0].members, 2);
        assert_eq!(report[0].top_features[0].feature, "caps");
        assert_eq!(report[0].active_features, ["caps"]);
        assert_eq!(report[0].misbehaving_fraction, None);
        let labeled = interpret(&model, &x, &names, Some(&[true, false, false, false]), 1);
        assert_eq!(labeled[0].misbehaving_fraction, Some(0.5));
    }

    #[test]
    fn uniform_block_selects_rank_one() {
        let x = Array2::ones((12, 6));
        let sel = select_rank(
            &x,
            &CoclusterConfig {
                lambda: 0.5,
                ..Default::default()
            },
            4,
        )
        .unwrap();
        assert_eq!(sel.rank, 1);
        assert!(!sel.degenerate);
    }

    #[test]
    fn zero_matrix_selects_rank_one_flagged() {
        let x = Array2::zeros((6, 4));
        let sel = select_rank(
            &x,
            &CoclusterConfig {
                lambda: 0.5,
                ..Default::default()
            },
            3,
        )
        .unwrap();
        assert_eq!(sel.rank, 1);
        assert!(sel.degenerate);
    }
}
