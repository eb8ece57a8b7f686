//! Per-(user, article) engagements and the seven engagement features.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};

use crate::cdf::CdfTable;
use crate::data::Corpus;
use crate::error::{Error, Result};
use crate::groundtruth::ReportRule;

pub const ENGAGEMENT_FEATURES: [&str; 7] = [
    "n_engagements",
    "duration_mean",
    "duration_min",
    "duration_max",
    "intensity_mean",
    "intensity_min",
    "intensity_max",
];

/// All comments one user posted on one article.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Engagement {
    pub user_id: String,
    pub article_id: String,
    /// Number of comments.
    pub intensity: u32,
    pub first_at: DateTime<Utc>,
    pub last_at: DateTime<Utc>,
}

impl Engagement {
    /// Seconds from first to last comment; zero for a single comment.
    pub fn duration(&self) -> i64 {
        (self.last_at - self.first_at).num_seconds()
    }
}

/// One engagement per distinct (user, article) pair, ordered by user then article.
pub fn derive_engagements(corpus: &Corpus) -> Vec<Engagement> {
    let mut out = Vec::new();
    for (user, idx) in corpus.user_index() {
        out.extend(user_engagements(corpus, user, idx));
    }
    out
}

fn user_engagements(corpus: &Corpus, user: &str, idx: &[usize]) -> Vec<Engagement> {
    let mut by_article: BTreeMap<&str, Engagement> = BTreeMap::new();
    for &i in idx {
        let c = &corpus.comments()[i];
        by_article
            .entry(c.article_id.as_str())
            .and_modify(|e| {
                e.intensity += 1;
                e.first_at = e.first_at.min(c.created_at);
                e.last_at = e.last_at.max(c.created_at);
            })
            .or_insert_with(|| Engagement {
                user_id: user.to_string(),
                article_id: c.article_id.clone(),
                intensity: 1,
                first_at: c.created_at,
                last_at: c.created_at,
            });
    }
    by_article.into_values().collect()
}

/// Engagements of a single user.
pub fn engagements_of(corpus: &Corpus, user: &str) -> Vec<Engagement> {
    corpus
        .user_index()
        .get(user)
        .map(|idx| user_engagements(corpus, user, idx))
        .unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngagementFeatures {
    pub n_engagements: usize,
    pub duration_mean: f64,
    pub duration_min: f64,
    pub duration_max: f64,
    pub intensity_mean: f64,
    pub intensity_min: f64,
    pub intensity_max: f64,
}

impl EngagementFeatures {
    pub fn to_array(&self) -> [f64; 7] {
        [
            self.n_engagements as f64,
            self.duration_mean,
            self.duration_min,
            self.duration_max,
            self.intensity_mean,
            self.intensity_min,
            self.intensity_max,
        ]
    }
}

/// Summary statistics of a user's engagements. Durations are in seconds.
pub fn engagement_features(user: &str, engagements: &[Engagement]) -> Result<EngagementFeatures> {
    let mine: Vec<&Engagement> = engagements.iter().filter(|e| e.user_id == user).collect();
    if mine.is_empty() {
        return Err(Error::UnknownUser(user.to_string()));
    }
    let n = mine.len();
    // Integer sums keep the means independent of accumulation order.
    let dur_sum: i128 = mine.iter().map(|e| i128::from(e.duration())).sum();
    let int_sum: u64 = mine.iter().map(|e| u64::from(e.intensity)).sum();
    let dur_min = mine.iter().map(|e| e.duration()).min().unwrap_or(0);
    let dur_max = mine.iter().map(|e| e.duration()).max().unwrap_or(0);
    let int_min = mine.iter().map(|e| e.intensity).min().unwrap_or(0);
    let int_max = mine.iter().map(|e| e.intensity).max().unwrap_or(0);
    Ok(EngagementFeatures {
        n_engagements: n,
        duration_mean: dur_sum as f64 / n as f64,
        duration_min: dur_min as f64,
        duration_max: dur_max as f64,
        intensity_mean: int_sum as f64 / n as f64,
        intensity_min: f64::from(int_min),
        intensity_max: f64::from(int_max),
    })
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::UndefinedCorrelation(
            "need at least two paired observations",
        ));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("a series has zero variance"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Correlation between engagement intensity and the number of reported
/// comments inside that engagement.
pub fn intensity_report_correlation(
    engagements: &[Engagement],
    corpus: &Corpus,
    rule: ReportRule,
) -> Result<f64> {
    let mut reported: BTreeMap<(&str, &str), u32> = BTreeMap::new();
    for c in corpus.comments() {
        if rule.is_reported(c.reports) {
            *reported
                .entry((c.user_id.as_str(), c.article_id.as_str()))
                .or_default() += 1;
        }
    }
    let x: Vec<f64> = engagements.iter().map(|e| f64::from(e.intensity)).collect();
    let y: Vec<f64> = engagements
        .iter()
        .map(|e| {
            f64::from(
                reported
                    .get(&(e.user_id.as_str(), e.article_id.as_str()))
                    .copied()
                    .unwrap_or(0),
            )
        })
        .collect();
    pearson(&x, &y)
}

/// Duration (hours) and intensity distributions over all engagements.
pub fn engagement_cdf_export(engagements: &[Engagement]) -> CdfTable {
    let durations: Vec<f64> = engagements
        .iter()
        .map(|e| e.duration() as f64 / 3600.0)
        .collect();
    let intensities: Vec<f64> = engagements.iter().map(|e| f64::from(e.intensity)).collect();
    let mut table = CdfTable::default();
    table.push_series("duration_hours", &durations);
    table.push_series("intensity", &intensities);
    table
}
