//! Seeded synthetic corpora with role-conditioned behavior, and planted
//! block matrices for co-clustering checks.

use chrono::{DateTime, Duration, Utc};
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, LogNormal, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Comment, Provenance, Role, RoleLabel};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub n_benign: usize,
    pub n_troll: usize,
    pub n_spammer: usize,
    pub n_fanatic: usize,
    pub n_articles: usize,
    /// Articles that attract trolls and fanatics.
    pub n_hot_articles: usize,
    pub days: u32,
    /// Median total comments of a benign user.
    pub benign_median_comments: f64,
    /// Minimum total comments of a misbehaving user.
    pub misbehaving_min_comments: usize,
    /// Probability that a misbehaving user's comment collects enough reports.
    pub report_rate: f64,
    /// Scales every planted behavioral difference, 0 (none) to 1 (full).
    pub signal: f64,
    pub start: String,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_benign: 1800,
            n_troll: 104,
            n_spammer: 21,
            n_fanatic: 75,
            n_articles: 6000,
            n_hot_articles: 1500,
            days: 120,
            benign_median_comments: 20.0,
            misbehaving_min_comments: 90,
            report_rate: 0.6,
            signal: 0.1,
            start: "2017-01-02T00:00:00Z".into(),
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("synth: {m}")));
        if self.n_articles == 0 {
            return bad("n_articles must be positive");
        }
        if self.n_hot_articles == 0 || self.n_hot_articles > self.n_articles {
            return bad("n_hot_articles must be in 1..=n_articles");
        }
        if self.days == 0 {
            return bad("days must be positive");
        }
        if self.benign_median_comments.is_nan() || self.benign_median_comments < 1.0 {
            return bad("benign_median_comments must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.report_rate) {
            return bad("report_rate must be a probability");
        }
        if !(0.0..=1.0).contains(&self.signal) {
            return bad("signal must be in [0, 1]");
        }
        if self.misbehaving_min_comments == 0 {
            return bad("misbehaving_min_comments must be positive");
        }
        crate::data::parse_timestamp(&self.start).map_err(Error::Config)?;
        Ok(())
    }

    pub fn n_users(&self) -> usize {
        self.n_benign + self.n_troll + self.n_spammer + self.n_fanatic
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub comments: Vec<Comment>,
    pub labels: Vec<RoleLabel>,
}

/// Role-specific behavior parameters, already blended by `signal`.
#[derive(Debug, Clone, Copy)]
struct Behavior {
    /// Log-normal median and shape of total comments.
    comments_median: f64,
    comments_sigma: f64,
    min_comments: usize,
    /// Mean extra comments per engagement beyond the first.
    extra_per_engagement: f64,
    /// Mean gap between comments inside an engagement, hours.
    gap_hours: f64,
    hot_share: f64,
    /// Preferred UTC hour range and spread; `None` means around the clock.
    peak: Option<(f64, f64)>,
    hour_sd: f64,
    /// Probability that the user follows `peak`/`hour_sd` rather than the
    /// benign daily rhythm.
    planted_hours: f64,
    words_median: f64,
    caps_rate: f64,
    url_rate: f64,
    copy_rate: f64,
    exclaim_rate: f64,
    report_rate: f64,
}

fn behavior(role: Role, spec: &SynthSpec) -> Behavior {
    let benign = Behavior {
        comments_median: spec.benign_median_comments,
        comments_sigma: 1.1,
        min_comments: 1,
        extra_per_engagement: 0.5,
        gap_hours: 2.0,
        hot_share: 0.05,
        peak: Some((12.0, 24.0)),
        hour_sd: 3.0,
        planted_hours: 0.0,
        words_median: 25.0,
        caps_rate: 0.01,
        url_rate: 0.02,
        copy_rate: 0.0,
        exclaim_rate: 0.1,
        report_rate: 0.0,
    };
    let s = spec.signal;
    let mix = |b: f64, m: f64| b + s * (m - b);
    let planted = match role {
        Role::Benign => return benign,
        Role::Troll => Behavior {
            extra_per_engagement: 3.0,
            gap_hours: 5.0,
            hot_share: 0.7,
            peak: Some((7.0, 13.0)),
            hour_sd: 1.5,
            words_median: 14.0,
            caps_rate: 0.35,
            exclaim_rate: 0.7,
            ..benign
        },
        Role::Spammer => Behavior {
            extra_per_engagement: 0.0,
            gap_hours: 0.1,
            hot_share: 0.05,
            peak: None,
            hour_sd: 0.0,
            words_median: 20.0,
            caps_rate: 0.1,
            url_rate: 0.9,
            copy_rate: 0.7,
            exclaim_rate: 0.3,
            ..benign
        },
        Role::Fanatic => Behavior {
            extra_per_engagement: 2.0,
            gap_hours: 4.0,
            hot_share: 0.6,
            peak: Some((14.0, 22.0)),
            hour_sd: 2.0,
            words_median: 80.0,
            caps_rate: 0.06,
            exclaim_rate: 0.5,
            ..benign
        },
    };
    Behavior {
        comments_median: 110.0,
        comments_sigma: 0.4,
        min_comments: spec.misbehaving_min_comments,
        extra_per_engagement: mix(benign.extra_per_engagement, planted.extra_per_engagement),
        gap_hours: mix(benign.gap_hours, planted.gap_hours),
        hot_share: mix(benign.hot_share, planted.hot_share),
        peak: planted.peak,
        hour_sd: planted.hour_sd,
        planted_hours: s,
        words_median: mix(benign.words_median, planted.words_median),
        caps_rate: mix(benign.caps_rate, planted.caps_rate),
        url_rate: mix(benign.url_rate, planted.url_rate),
        copy_rate: mix(benign.copy_rate, planted.copy_rate),
        exclaim_rate: mix(benign.exclaim_rate, planted.exclaim_rate),
        report_rate: spec.report_rate,
    }
}

const VOCAB: [&str; 64] = [
    "the",
    "news",
    "people",
    "government",
    "article",
    "really",
    "think",
    "about",
    "country",
    "because",
    "never",
    "always",
    "money",
    "media",
    "story",
    "policy",
    "election",
    "truth",
    "believe",
    "another",
    "reason",
    "problem",
    "every",
    "world",
    "market",
    "support",
    "change",
    "public",
    "simply",
    "nothing",
    "better",
    "should",
    "would",
    "could",
    "point",
    "again",
    "history",
    "reality",
    "opinion",
    "agree",
    "wrong",
    "right",
    "question",
    "answer",
    "evidence",
    "report",
    "economy",
    "future",
    "leader",
    "party",
    "vote",
    "issue",
    "interesting",
    "obviously",
    "completely",
    "community",
    "information",
    "a",
    "is",
    "of",
    "and",
    "to",
    "in",
    "this",
];

/// Generates the corpus; users are numbered `u00000...` in a shuffled role
/// order so ids carry no role information.
pub fn generate(spec: &SynthSpec, master_seed: u64) -> Result<SynthCorpus> {
    spec.validate()?;
    let start = crate::data::parse_timestamp(&spec.start).map_err(Error::Config)?;
    let mut roles: Vec<Role> = std::iter::repeat_n(Role::Benign, spec.n_benign)
        .chain(std::iter::repeat_n(Role::Troll, spec.n_troll))
        .chain(std::iter::repeat_n(Role::Spammer, spec.n_spammer))
        .chain(std::iter::repeat_n(Role::Fanatic, spec.n_fanatic))
        .collect();
    roles.shuffle(&mut seed::rng(master_seed, "synth/roles"));
    let width = spec.n_users().max(1).to_string().len().max(5);

    let per_user: Vec<Vec<Comment>> = roles
        .par_iter()
        .enumerate()
        .map(|(i, &role)| {
            let user = format!("u{i:0width$}");
            let mut rng = seed::rng(seed::derive_index(master_seed, i as u64), "synth/user");
            user_comments(&user, role, spec, start, &mut rng)
        })
        .collect();
    let labels = roles
        .iter()
        .enumerate()
        .map(|(i, &role)| RoleLabel {
            user_id: format!("u{i:0width$}"),
            role,
            provenance: Provenance::Synthetic,
        })
        .collect();
    Ok(SynthCorpus {
        comments: per_user.into_iter().flatten().collect(),
        labels,
    })
}

fn user_comments(
    user: &str,
    role: Role,
    spec: &SynthSpec,
    start: DateTime<Utc>,
    rng: &mut ChaCha8Rng,
) -> Vec<Comment> {
    let b = behavior(role, spec);
    let total = {
        let d = LogNormal::new(b.comments_median.ln(), b.comments_sigma).expect("valid log-normal");
        (d.sample(rng).round() as usize).clamp(b.min_comments, 2000)
    };
    let (peak, hour_sd) = if b.planted_hours > 0.0 && rng.gen_bool(b.planted_hours) {
        (b.peak, b.hour_sd)
    } else {
        let benign = behavior(Role::Benign, spec);
        (benign.peak, benign.hour_sd)
    };
    let home_hour = peak.map(|(lo, hi)| rng.gen_range(lo..hi));
    let templates: Vec<String> = (0..3).map(|k| spam_text(rng, user, k, &b)).collect();
    let gap = Exp::new(1.0 / b.gap_hours.max(1e-3)).expect("positive rate");
    let extra = Exp::new(1.0 / b.extra_per_engagement.max(1e-9)).expect("positive rate");

    let mut out = Vec::with_capacity(total);
    while out.len() < total {
        let article = if rng.gen_bool(b.hot_share) {
            rng.gen_range(0..spec.n_hot_articles)
        } else {
            rng.gen_range(0..spec.n_articles)
        };
        let day = rng.gen_range(0..spec.days);
        let hour = match home_hour {
            Some(h) => {
                let noise = Normal::new(0.0, hour_sd.max(1e-9)).expect("valid normal");
                (h + noise.sample(rng)).rem_euclid(24.0)
            }
            None => rng.gen_range(0.0..24.0),
        };
        let mut at =
            start + Duration::days(i64::from(day)) + Duration::seconds((hour * 3600.0) as i64);
        let n = if b.extra_per_engagement > 0.0 {
            1 + extra.sample(rng).round() as usize
        } else {
            1
        };
        for _ in 0..n.min(total - out.len()) {
            let text = if b.copy_rate > 0.0 && rng.gen_bool(b.copy_rate) {
                templates.choose(rng).expect("three templates").clone()
            } else {
                comment_text(rng, &b)
            };
            let reports = if b.report_rate > 0.0 && rng.gen_bool(b.report_rate) {
                rng.gen_range(3..12)
            } else if rng.gen_bool(0.05) {
                1
            } else {
                0
            };
            out.push(Comment {
                comment_id: format!("{user}-{:05}", out.len()),
                user_id: user.to_string(),
                article_id: format!("a{article:05}"),
                created_at: at,
                text,
                reports,
            });
            at += Duration::seconds((gap.sample(rng) * 3600.0) as i64);
        }
    }
    out
}

fn comment_text(rng: &mut ChaCha8Rng, b: &Behavior) -> String {
    let words = {
        let d = LogNormal::new(b.words_median.ln(), 0.6).expect("valid log-normal");
        (d.sample(rng).round() as usize).clamp(1, 600)
    };
    let mut text = String::new();
    let mut in_sentence = 0;
    let sentence_len = rng.gen_range(8..16);
    for w in 0..words {
        let mut word = VOCAB.choose(rng).expect("vocabulary").to_string();
        if rng.gen_bool(b.caps_rate) {
            word = word.to_uppercase();
        } else if in_sentence == 0 {
            let mut c = word.chars();
            if let Some(first) = c.next() {
                word = first.to_uppercase().chain(c).collect();
            }
        }
        if !text.is_empty() {
            text.push(' ');
        }
        text.push_str(&word);
        in_sentence += 1;
        if in_sentence == sentence_len || w + 1 == words {
            text.push(if rng.gen_bool(b.exclaim_rate) {
                '!'
            } else {
                '.'
            });
            in_sentence = 0;
        }
    }
    if rng.gen_bool(b.url_rate) {
        text.push_str(&format!(
            " http://www.site{}.example/page",
            rng.gen_range(0..50)
        ));
    }
    text
}

fn spam_text(rng: &mut ChaCha8Rng, user: &str, k: usize, b: &Behavior) -> String {
    let body = comment_text(rng, b);
    format!("{body} Visit http://{user}-offer{k}.example/deal today!")
}

/// Row and column indices of one planted block.
pub type BlockSupport = (Vec<usize>, Vec<usize>);

/// A nonnegative `rows × cols` matrix with `blocks` disjoint all-ones blocks of
/// `block_rows × block_cols` on the diagonal, plus uniform noise in
/// `[-noise, noise]` clipped at zero. Returns the matrix and, per block, its
/// row and column ranges.
pub fn planted_blocks(
    rows: usize,
    cols: usize,
    blocks: usize,
    block_rows: usize,
    block_cols: usize,
    noise: f64,
    master_seed: u64,
) -> Result<(Array2<f64>, Vec<BlockSupport>)> {
    if blocks * block_rows > rows || blocks * block_cols > cols {
        return Err(Error::Config(
            "planted blocks do not fit in the matrix".into(),
        ));
    }
    let mut rng = seed::rng(master_seed, "synth/planted");
    let mut x = Array2::from_shape_fn((rows, cols), |_| {
        if noise > 0.0 {
            rng.gen_range(-noise..=noise)
        } else {
            0.0
        }
    });
    let mut supports = Vec::with_capacity(blocks);
    for k in 0..blocks {
        let r: Vec<usize> = (k * block_rows..(k + 1) * block_rows).collect();
        let c: Vec<usize> = (k * block_cols..(k + 1) * block_cols).collect();
        for &i in &r {
            for &j in &c {
                x[[i, j]] += 1.0;
            }
        }
        supports.push((r, c));
    }
    x.mapv_inplace(|v| v.max(0.0));
    Ok((x, supports))
}
