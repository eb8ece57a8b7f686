//! Report-based ground truth: reported comments, user groups by reported
//! comment count, and activity-matched labeled datasets.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::{write_file, Corpus, FeatureMatrix};
use crate::error::{Error, Result};
use crate::seed;

/// When a comment counts as reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRule {
    pub n_rep: u32,
    /// `reports >= n_rep` when true, `reports > n_rep` otherwise.
    pub inclusive: bool,
}

impl Default for ReportRule {
    fn default() -> Self {
        ReportRule {
            n_rep: 3,
            inclusive: true,
        }
    }
}

impl ReportRule {
    pub fn is_reported(&self, reports: u32) -> bool {
        if self.inclusive {
            reports >= self.n_rep
        } else {
            reports > self.n_rep
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthConfig {
    pub rule: ReportRule,
    /// Group thresholds, `2^i` for `i = 0..=7` by default.
    pub ncomm_grid: Vec<usize>,
    pub sample_size: usize,
    pub seed: u64,
}

impl Default for GroundTruthConfig {
    fn default() -> Self {
        GroundTruthConfig {
            rule: ReportRule::default(),
            ncomm_grid: (0..=7).map(|i| 1usize << i).collect(),
            sample_size: 200,
            seed: 0,
        }
    }
}

impl GroundTruthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rule.n_rep < 1 {
            return Err(Error::Config("n_rep must be at least 1".into()));
        }
        if self.ncomm_grid.is_empty() || self.ncomm_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "ncomm grid must be nonempty and strictly increasing".into(),
            ));
        }
        if self.sample_size == 0 {
            return Err(Error::Config("sample_size must be positive".into()));
        }
        Ok(())
    }
}

/// Reported-comment count for every user in the corpus, zero included.
pub fn reported_comments(corpus: &Corpus, rule: ReportRule) -> BTreeMap<String, usize> {
    corpus
        .user_index()
        .iter()
        .map(|(user, idx)| {
            let n = idx
                .iter()
                .filter(|&&i| rule.is_reported(corpus.comments()[i].reports))
                .count();
            (user.clone(), n)
        })
        .collect()
}

/// Number of users with at least `ncomm` reported comments, per grid value.
pub fn group_census(corpus: &Corpus, config: &GroundTruthConfig) -> Vec<(usize, usize)> {
    let counts = reported_comments(corpus, config.rule);
    config
        .ncomm_grid
        .iter()
        .map(|&t| (t, counts.values().filter(|&&c| c >= t).count()))
        .collect()
}

pub fn census_csv(census: &[(usize, usize)]) -> String {
    let mut out = String::from("ncomm,users\n");
    for (t, n) in census {
        out.push_str(&format!("{t},{n}\n"));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub ncomm: usize,
    pub positives: Vec<String>,
    pub negatives: Vec<String>,
    /// Mean absolute difference in total comments between matched pairs.
    pub mean_count_gap: f64,
}

impl LabeledDataset {
    /// Positives then negatives, with labels 1 and 0.
    pub fn users_and_labels(&self) -> (Vec<String>, Vec<usize>) {
        let users: Vec<String> = self
            .positives
            .iter()
            .chain(&self.negatives)
            .cloned()
            .collect();
        let labels = std::iter::repeat_n(1, self.positives.len())
            .chain(std::iter::repeat_n(0, self.negatives.len()))
            .collect();
        (users, labels)
    }

    /// `user_id,label,<features...>` rows.
    pub fn to_csv(&self, features: &FeatureMatrix) -> Result<Vec<u8>> {
        let (users, labels) = self.users_and_labels();
        let sub = features.select_users(&users)?;
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["user_id".to_string(), "label".to_string()];
        header.extend(sub.names().iter().cloned());
        wtr.write_record(&header)?;
        for (i, user) in users.iter().enumerate() {
            let mut rec = vec![user.clone(), labels[i].to_string()];
            rec.extend(sub.row(i).iter().map(|v| v.to_string()));
            wtr.write_record(&rec)?;
        }
        wtr.into_inner().map_err(|e| Error::Matrix(e.to_string()))
    }

    pub fn save(&self, features: &FeatureMatrix, path: impl AsRef<Path>) -> Result<()> {
        write_file(path.as_ref(), &self.to_csv(features)?)
    }
}

/// Samples `sample_size` users with at least `ncomm` reported comments and
/// pairs each with the unused benign user (no reported comments) closest in
/// total comment count.
///
/// Positives are matched in descending order of comment count; equally close
/// candidates resolve to the lower user id.
pub fn build_dataset(
    corpus: &Corpus,
    ncomm: usize,
    config: &GroundTruthConfig,
) -> Result<LabeledDataset> {
    config.validate()?;
    let counts = reported_comments(corpus, config.rule);
    let mut pool: Vec<&String> = counts
        .iter()
        .filter(|(_, &c)| c >= ncomm.max(1))
        .map(|(u, _)| u)
        .collect();
    let benign: BTreeSet<(usize, &str)> = counts
        .iter()
        .filter(|(_, &c)| c == 0)
        .map(|(u, _)| (corpus.comment_count(u), u.as_str()))
        .collect();
    if pool.len() < config.sample_size {
        return Err(Error::InsufficientUsers {
            side: "reported",
            needed: config.sample_size,
            available: pool.len(),
        });
    }
    if benign.len() < config.sample_size {
        return Err(Error::InsufficientUsers {
            side: "benign",
            needed: config.sample_size,
            available: benign.len(),
        });
    }
    let mut rng = seed::rng(config.seed, &format!("groundtruth/sample/{ncomm}"));
    pool.shuffle(&mut rng);
    pool.truncate(config.sample_size);
    let mut positives: Vec<String> = pool.into_iter().cloned().collect();
    positives.sort();

    let mut order: Vec<(usize, &str)> = positives
        .iter()
        .map(|u| (corpus.comment_count(u), u.as_str()))
        .collect();
    order.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));

    let mut available = benign;
    let mut matched: HashMap<&str, String> = HashMap::new();
    let mut gap_sum = 0u64;
    for &(count, user) in &order {
        let pick = nearest(&available, count).expect("benign pool checked above");
        available.remove(&pick);
        gap_sum += pick.0.abs_diff(count) as u64;
        matched.insert(user, pick.1.to_string());
    }
    let negatives = positives
        .iter()
        .map(|p| matched[p.as_str()].clone())
        .collect();
    Ok(LabeledDataset {
        ncomm,
        mean_count_gap: gap_sum as f64 / positives.len() as f64,
        positives,
        negatives,
    })
}

fn nearest<'a>(set: &BTreeSet<(usize, &'a str)>, count: usize) -> Option<(usize, &'a str)> {
    // Lowest id among the largest count <= target, and among the smallest count > target.
    let below = set
        .range(..(count + 1, ""))
        .next_back()
        .and_then(|&(c, _)| set.range((c, "")..).next().copied());
    let above = set.range((count + 1, "")..).next().copied();
    match (below, above) {
        (Some(b), Some(a)) => {
            let (db, da) = (count - b.0, a.0 - count);
            Some(if db < da || (db == da && b.1 < a.1) {
                b
            } else {
                a
            })
        }
        (b, a) => b.or(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Comment;
    use chrono::{TimeZone, Utc};

    /// `(user, total comments, reported comments)`
    fn corpus(users: &[(&str, usize, usize)]) -> Corpus {
        let mut comments = Vec::new();
        for (user, total, reported) in users {
            for i in 0..*total {
                comments.push(Comment {
                    comment_id: format!("{user}-{i}"),
                    user_id: user.to_string(),
                    article_id: format!("a{i}"),
                    created_at: Utc.timestamp_opt(1_500_000_000 + i as i64, 0).unwrap(),
                    text: String::new(),
                    reports: if i < *reported { 3 } else { 0 },
                });
            }
        }
        Corpus::new(comments).unwrap()
    }

    #[test]
    fn inclusive_threshold() {
        let rule = ReportRule::default();
        assert!(rule.is_reported(3));
        assert!(!rule.is_reported(2));
        let strict = ReportRule {
            inclusive: false,
            ..rule
        };
        assert!(!strict.is_reported(3));
        assert!(strict.is_reported(4));
    }

    #[test]
    fn benign_users_have_zero_count() {
        let c = corpus(&[("u", 4, 0), ("v", 4, 2)]);
        let counts = reported_comments(&c, ReportRule::default());
        assert_eq!(counts["u"], 0);
        assert_eq!(counts["v"], 2);
    }

    #[test]
    fn nearest_count_matching() {
        let c = corpus(&[
            ("p1", 10, 5),
            ("p2", 100, 5),
            ("b9", 9, 0),
            ("b55", 55, 0),
            ("b98", 98, 0),
        ]);
        let cfg = GroundTruthConfig {
            sample_size: 2,
            ..Default::default()
        };
        let ds = build_dataset(&c, 1, &cfg).unwrap();
        assert_eq!(ds.positives, ["p1", "p2"]);
        assert_eq!(ds.negatives, ["b9", "b98"]);
        assert_eq!(ds.mean_count_gap, 1.5);
    }

    #[test]
    fn equidistant_candidates_resolve_to_lower_id() {
        let c = corpus(&[("p", 10, 5), ("z", 9, 0), ("a", 11, 0)]);
        let cfg = GroundTruthConfig {
            sample_size: 1,
            ..Default::default()
        };
        assert_eq!(build_dataset(&c, 1, &cfg).unwrap().negatives, ["a"]);
    }

    #[test]
    fn shortfall_is_reported() {
        let c = corpus(&[("p", 10, 5), ("b", 9, 0), ("b2", 9, 0)]);
        let cfg = GroundTruthConfig {
            sample_size: 2,
            ..Default::default()
        };
        assert!(matches!(
            build_dataset(&c, 1, &cfg),
            Err(Error::InsufficientUsers {
                side: "reported",
                needed: 2,
                available: 1
            })
        ));
    }

    #[test]
    fn census_is_nonincreasing() {
        let c = corpus(&[("a", 10, 5), ("b", 3, 1), ("c", 2, 0)]);
        let census = group_census(&c, &GroundTruthConfig::default());
        assert_eq!(
            census.iter().map(|x| x.1).collect::<Vec<_>>(),
            [2, 1, 1, 0, 0, 0, 0, 0]
        );
        let benign = corpus(&[("a", 10, 0)]);
        assert!(group_census(&benign, &GroundTruthConfig::default())
            .iter()
            .all(|x| x.1 == 0));
    }

    #[test]
    fn sampling_is_seeded() {
        let users: Vec<(String, usize, usize)> = (0..30)
            .map(|i| (format!("u{i:02}"), 5 + i, if i < 15 { 2 } else { 0 }))
            .collect();
        let refs: Vec<(&str, usize, usize)> =
            users.iter().map(|(u, a, b)| (u.as_str(), *a, *b)).collect();
        let c = corpus(&refs);
        let cfg = GroundTruthConfig {
            sample_size: 5,
            seed: 11,
            ..Default::default()
        };
        let a = build_dataset(&c, 1, &cfg).unwrap();
        assert_eq!(a, build_dataset(&c, 1, &cfg).unwrap());
        let other = build_dataset(&c, 1, &GroundTruthConfig { seed: 12, ..cfg }).unwrap();
        assert_ne!(a.positives, other.positives);
    }
}
