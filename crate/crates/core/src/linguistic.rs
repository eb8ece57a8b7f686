//! Per-comment text statistics and the 24 linguistic features.

use std::collections::HashMap;

use crate::cdf::CdfTable;
use crate::data::Corpus;
use crate::error::{Error, Result};

const URL_PREFIXES: [&str; 3] = ["http://", "https://", "www."];

/// Per-comment statistics aggregated into mean/min/max features, in feature order.
pub const PER_COMMENT_STATS: [&str; 7] = [
    "words",
    "sentences",
    "capital_pct",
    "flesch_ease",
    "fk_grade",
    "ari",
    "urls",
];

pub fn linguistic_feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(24);
    for stat in PER_COMMENT_STATS {
        for agg in ["mean", "min", "max"] {
            names.push(format!("{stat}_{agg}"));
        }
    }
    names.extend(["total_urls", "comments_with_urls", "verbatim_copy_ratio"].map(String::from));
    names
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CommentTextStats {
    pub words: u32,
    pub sentences: u32,
    /// Uppercase share of alphabetic characters outside URLs.
    pub capital_pct: f64,
    pub flesch_ease: f64,
    pub fk_grade: f64,
    pub ari: f64,
    pub urls: u32,
}

impl CommentTextStats {
    fn values(&self) -> [f64; 7] {
        [
            f64::from(self.words),
            f64::from(self.sentences),
            self.capital_pct,
            self.flesch_ease,
            self.fk_grade,
            self.ari,
            f64::from(self.urls),
        ]
    }
}

/// Replaces every URL with a space and returns the masked text and URL count.
pub fn mask_urls(text: &str) -> (String, u32) {
    let mut out = String::with_capacity(text.len());
    let mut count = 0;
    let mut prev_alnum = false;
    let mut chars = text.char_indices().peekable();
    while let Some((i, ch)) = chars.next() {
        let rest = &text[i..];
        let is_url = !prev_alnum
            && URL_PREFIXES.iter().any(|p| {
                rest.len() >= p.len()
                    && rest.is_char_boundary(p.len())
                    && rest[..p.len()].eq_ignore_ascii_case(p)
            });
        if is_url {
            count += 1;
            out.push(' ');
            while let Some(&(_, c)) = chars.peek() {
                if c.is_whitespace() {
                    break;
                }
                chars.next();
            }
            prev_alnum = false;
            continue;
        }
        out.push(ch);
        prev_alnum = ch.is_alphanumeric();
    }
    (out, count)
}

/// Vowel-group syllable estimate: runs of vowels count once, a trailing
/// silent `e` is dropped, and every word has at least one syllable.
pub fn syllables(word: &str) -> u32 {
    let letters: Vec<char> = word
        .chars()
        .filter(|c| c.is_alphabetic())
        .flat_map(char::to_lowercase)
        .collect();
    let is_vowel = |c: char| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y');
    let mut end = letters.len();
    if end > 2 && letters[end - 1] == 'e' && !is_vowel(letters[end - 2]) {
        end -= 1;
    }
    let mut groups = 0;
    let mut in_group = false;
    for &c in &letters[..end] {
        let v = is_vowel(c);
        if v && !in_group {
            groups += 1;
        }
        in_group = v;
    }
    groups.max(1)
}

pub fn word_count(text: &str) -> u32 {
    let (masked, _) = mask_urls(text);
    words_of(&masked).count() as u32
}

fn words_of(masked: &str) -> impl Iterator<Item = &str> {
    masked
        .split_whitespace()
        .filter(|t| t.chars().any(char::is_alphanumeric))
}

pub fn comment_stats(text: &str) -> CommentTextStats {
    let (masked, urls) = mask_urls(text);
    let words: Vec<&str> = words_of(&masked).collect();
    let sentences = masked
        .split(['.', '!', '?'])
        .filter(|s| s.chars().any(char::is_alphanumeric))
        .count() as u32;
    let (mut alpha, mut upper) = (0u64, 0u64);
    for c in masked.chars().filter(|c| c.is_alphabetic()) {
        alpha += 1;
        if c.is_uppercase() {
            upper += 1;
        }
    }
    let capital_pct = if alpha == 0 {
        0.0
    } else {
        upper as f64 / alpha as f64
    };
    let n_words = words.len() as u32;
    let (flesch_ease, fk_grade, ari) = if n_words == 0 || sentences == 0 {
        (0.0, 0.0, 0.0)
    } else {
        let w = f64::from(n_words);
        let s = f64::from(sentences);
        let syl: u32 = words.iter().map(|t| syllables(t)).sum();
        let chars: usize = words
            .iter()
            .map(|t| t.chars().filter(|c| c.is_alphanumeric()).count())
            .sum();
        let wps = w / s;
        let spw = f64::from(syl) / w;
        (
            206.835 - 1.015 * wps - 84.6 * spw,
            0.39 * wps + 11.8 * spw - 15.59,
            4.71 * (chars as f64 / w) + 0.5 * wps - 21.43,
        )
    };
    CommentTextStats {
        words: n_words,
        sentences,
        capital_pct,
        flesch_ease,
        fk_grade,
        ari,
        urls,
    }
}

/// Share of the user's comments (with at least `min_words` words) whose exact
/// text appears in another of the user's comments.
pub fn verbatim_copy_ratio(user: &str, corpus: &Corpus, min_words: u32) -> f64 {
    let texts: Vec<&str> = corpus
        .user_comments(user)
        .map(|c| c.text.as_str())
        .filter(|t| word_count(t) >= min_words)
        .collect();
    copy_ratio(&texts)
}

fn copy_ratio(texts: &[&str]) -> f64 {
    if texts.is_empty() {
        return 0.0;
    }
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for t in texts {
        *freq.entry(t).or_default() += 1;
    }
    let copies = texts.iter().filter(|t| freq[*t] > 1).count();
    copies as f64 / texts.len() as f64
}

pub fn linguistic_features(user: &str, corpus: &Corpus) -> Result<[f64; 24]> {
    let texts: Vec<&str> = corpus
        .user_comments(user)
        .map(|c| c.text.as_str())
        .collect();
    if texts.is_empty() {
        return Err(Error::UnknownUser(user.to_string()));
    }
    let stats: Vec<[f64; 7]> = texts.iter().map(|t| comment_stats(t).values()).collect();
    let n = stats.len() as f64;
    let mut out = [0.0; 24];
    for j in 0..7 {
        let col = stats.iter().map(|s| s[j]);
        out[3 * j] = col.clone().sum::<f64>() / n;
        out[3 * j + 1] = col.clone().fold(f64::INFINITY, f64::min);
        out[3 * j + 2] = col.fold(f64::NEG_INFINITY, f64::max);
    }
    out[21] = stats.iter().map(|s| s[6]).sum();
    out[22] = stats.iter().filter(|s| s[6] > 0.0).count() as f64;
    out[23] = copy_ratio(&texts);
    Ok(out)
}

/// Word-count distributions: over all comments, per-user means and per-user minima.
pub fn length_cdf_export(corpus: &Corpus) -> CdfTable {
    let all: Vec<f64> = corpus
        .comments()
        .iter()
        .map(|c| f64::from(word_count(&c.text)))
        .collect();
    let mut means = Vec::new();
    let mut mins = Vec::new();
    for idx in corpus.user_index().values() {
        let counts: Vec<f64> = idx
            .iter()
            .map(|&i| f64::from(word_count(&corpus.comments()[i].text)))
            .collect();
        means.push(counts.iter().sum::<f64>() / counts.len() as f64);
        mins.push(counts.iter().copied().fold(f64::INFINITY, f64::min));
    }
    let mut table = CdfTable::default();
    table.push_series("all_comments", &all);
    table.push_series("user_mean", &means);
    table.push_series("user_min", &mins);
    table
}
