//! Hour-of-day activity profiles, highly-active hours and the weekday heatmap.
//!
//! Everything is computed in UTC.

use chrono::{Datelike, Timelike};

use crate::data::{Comment, Corpus};
use crate::error::{Error, Result};

pub fn temporal_feature_names() -> Vec<String> {
    let mut names: Vec<String> = (0..24).map(|h| format!("hour_{h:02}")).collect();
    names.push("highly_active_hours".into());
    names
}

/// Comments per UTC hour-of-day, summed over all days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HourProfile {
    pub counts: [u64; 24],
}

impl HourProfile {
    pub fn from_comments<'a>(comments: impl IntoIterator<Item = &'a Comment>) -> Self {
        let mut counts = [0u64; 24];
        for c in comments {
            counts[c.created_at.hour() as usize] += 1;
        }
        HourProfile { counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Per-hour fractions of the user's comments; all zero when there are none.
    pub fn normalized(&self) -> [f64; 24] {
        let total = self.total();
        let mut out = [0.0; 24];
        if total > 0 {
            for (o, &c) in out.iter_mut().zip(&self.counts) {
                *o = c as f64 / total as f64;
            }
        }
        out
    }
}

/// Smallest number of hours whose combined activity is strictly more than
/// half of the total. Zero for an empty profile.
///
/// Works on integer counts, so the strict-majority boundary is exact.
pub fn highly_active_hours(profile: &HourProfile) -> u32 {
    let total = profile.total();
    let mut sorted = profile.counts;
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut covered = 0u64;
    for (h, c) in sorted.iter().enumerate() {
        covered += c;
        if 2 * covered > total {
            return h as u32 + 1;
        }
    }
    0
}

/// 24 hourly fractions followed by the highly-active hour count.
pub fn temporal_features(user: &str, corpus: &Corpus) -> Result<[f64; 25]> {
    let profile = HourProfile::from_comments(corpus.user_comments(user));
    if profile.total() == 0 {
        return Err(Error::UnknownUser(user.to_string()));
    }
    let mut out = [0.0; 25];
    out[..24].copy_from_slice(&profile.normalized());
    out[24] = f64::from(highly_active_hours(&profile));
    Ok(out)
}

/// Comment counts by weekday (Monday = 0) and UTC hour.
pub fn heatmap_export(corpus: &Corpus) -> [[u64; 24]; 7] {
    let mut cells = [[0u64; 24]; 7];
    for c in corpus.comments() {
        let day = c.created_at.weekday().num_days_from_monday() as usize;
        cells[day][c.created_at.hour() as usize] += 1;
    }
    cells
}

pub fn heatmap_csv(cells: &[[u64; 24]; 7]) -> String {
    let mut out = String::from("weekday");
    for h in 0..24 {
        out.push_str(&format!(",h{h:02}"));
    }
    out.push('\n');
    for (d, row) in cells.iter().enumerate() {
        out.push_str(&d.to_string());
        for v in row {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}
