//! Comment corpus model, ingestion and on-disk matrices.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, Utc};
use ndarray::{Array2, ArrayView1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub const COMMENT_FIELDS: [&str; 6] = [
    "comment_id",
    "user_id",
    "article_id",
    "created_at",
    "text",
    "reports",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comment {
    pub comment_id: String,
    pub user_id: String,
    pub article_id: String,
    pub created_at: DateTime<Utc>,
    pub text: String,
    pub reports: u32,
}

impl Comment {
    /// The canonical JSONL record for this comment.
    pub fn to_json_line(&self) -> String {
        let record = serde_json::json!({
            "comment_id": self.comment_id,
            "user_id": self.user_id,
            "article_id": self.article_id,
            "created_at": format_timestamp(&self.created_at),
            "text": self.text,
            "reports": self.reports,
        });
        record.to_string()
    }
}

pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

pub fn parse_timestamp(s: &str) -> std::result::Result<DateTime<Utc>, String> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| format!("`{s}` is not an ISO-8601 UTC timestamp ({e})"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Jsonl,
    Csv,
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(InputFormat::Jsonl),
            "csv" => Ok(InputFormat::Csv),
            other => Err(Error::Config(format!("unknown input format `{other}`"))),
        }
    }
}

/// An immutable, order-canonical set of comments with user and article indices.
///
/// Comments are stored sorted by `(created_at, comment_id)`, so every
/// per-user and per-article index list is time-ordered with ties broken by id,
/// and the corpus does not depend on the order records were read in.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    comments: Vec<Comment>,
    users: BTreeMap<String, Vec<usize>>,
    articles: BTreeMap<String, Vec<usize>>,
    pub source_site: Option<String>,
}

impl Corpus {
    pub fn new(comments: Vec<Comment>) -> Result<Self> {
        let mut seen: HashMap<&str, usize> = HashMap::with_capacity(comments.len());
        for (i, c) in comments.iter().enumerate() {
            if let Some(first) = seen.insert(c.comment_id.as_str(), i + 1) {
                return Err(Error::DuplicateId {
                    id: c.comment_id.clone(),
                    first,
                    second: i + 1,
                });
            }
        }
        Ok(Self::from_unique(comments))
    }

    fn from_unique(mut comments: Vec<Comment>) -> Self {
        comments.par_sort_unstable_by(|a, b| {
            a.created_at
                .cmp(&b.created_at)
                .then_with(|| a.comment_id.cmp(&b.comment_id))
        });
        let (users, articles) = build_indices(&comments);
        Corpus {
            comments,
            users,
            articles,
            source_site: None,
        }
    }

    pub fn with_site(mut self, site: impl Into<String>) -> Self {
        self.source_site = Some(site.into());
        self
    }

    pub fn comments(&self) -> &[Comment] {
        &self.comments
    }

    pub fn len(&self) -> usize {
        self.comments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comments.is_empty()
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_articles(&self) -> usize {
        self.articles.len()
    }

    /// User ids in ascending order.
    pub fn user_ids(&self) -> impl Iterator<Item = &str> {
        self.users.keys().map(String::as_str)
    }

    pub fn user_index(&self) -> &BTreeMap<String, Vec<usize>> {
        &self.users
    }

    pub fn article_index(&self) -> &BTreeMap<String, Vec<usize>> {
        &self.articles
    }

    /// The user's comments, oldest first. Empty for unknown users.
    pub fn user_comments<'a>(&'a self, user: &str) -> impl Iterator<Item = &'a Comment> + 'a {
        self.users
            .get(user)
            .map(Vec::as_slice)
            .unwrap_or(&[])
            .iter()
            .map(move |&i| &self.comments[i])
    }

    pub fn comment_count(&self, user: &str) -> usize {
        self.users.get(user).map_or(0, Vec::len)
    }

    /// Rebuilds both indices from the comment list and compares them with the stored ones.
    pub fn indices_consistent(&self) -> bool {
        let (users, articles) = build_indices(&self.comments);
        users == self.users && articles == self.articles
    }

    /// Concatenates two corpora. Comment ids must stay unique.
    pub fn merged(&self, other: &Corpus) -> Result<Corpus> {
        let mut all = self.comments.clone();
        all.extend(other.comments.iter().cloned());
        let mut merged = Corpus::new(all)?;
        merged.source_site = self.source_site.clone();
        Ok(merged)
    }
}

fn build_indices(
    comments: &[Comment],
) -> (BTreeMap<String, Vec<usize>>, BTreeMap<String, Vec<usize>>) {
    let mut users: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    let mut articles: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, c) in comments.iter().enumerate() {
        users.entry(c.user_id.clone()).or_default().push(i);
        articles.entry(c.article_id.clone()).or_default().push(i);
    }
    (users, articles)
}

/// Reads and validates a corpus file.
pub fn ingest_corpus(path: impl AsRef<Path>, format: InputFormat) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    match format {
        InputFormat::Jsonl => read_jsonl(BufReader::new(file)),
        InputFormat::Csv => read_csv(file),
    }
    .map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Corpus> {
    let mut lines = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<jsonl>", e))?;
        if !line.trim().is_empty() {
            lines.push((i + 1, line));
        }
    }
    let comments = lines
        .par_iter()
        .map(|(n, line)| parse_json_record(*n, line))
        .collect::<Result<Vec<_>>>()?;
    let line_numbers: Vec<usize> = lines.iter().map(|(n, _)| *n).collect();
    corpus_with_lines(comments, &line_numbers)
}

fn corpus_with_lines(comments: Vec<Comment>, lines: &[usize]) -> Result<Corpus> {
    let mut seen: HashMap<&str, usize> = HashMap::with_capacity(comments.len());
    for (c, &line) in comments.iter().zip(lines) {
        if let Some(first) = seen.insert(c.comment_id.as_str(), line) {
            return Err(Error::DuplicateId {
                id: c.comment_id.clone(),
                first,
                second: line,
            });
        }
    }
    Ok(Corpus::from_unique(comments))
}

fn parse_json_record(line: usize, text: &str) -> Result<Comment> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Record {
        line,
        field: "<record>".into(),
        reason: e.to_string(),
    })?;
    let Value::Object(map) = value else {
        return Err(Error::Record {
            line,
            field: "<record>".into(),
            reason: "expected a JSON object".into(),
        });
    };
    let string = |field: &str| -> Result<String> {
        match map.get(field) {
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(record_err(line, field, "expected a string")),
            None => Err(record_err(line, field, "missing")),
        }
    };
    let created_at = string("created_at")?;
    Ok(Comment {
        comment_id: nonempty(line, "comment_id", string("comment_id")?)?,
        user_id: nonempty(line, "user_id", string("user_id")?)?,
        article_id: nonempty(line, "article_id", string("article_id")?)?,
        created_at: parse_timestamp(&created_at).map_err(|r| record_err(line, "created_at", &r))?,
        text: string("text")?,
        reports: json_reports(line, &map)?,
    })
}

fn json_reports(line: usize, map: &Map<String, Value>) -> Result<u32> {
    match map.get("reports") {
        Some(Value::Number(n)) => n
            .as_u64()
            .and_then(|v| u32::try_from(v).ok())
            .ok_or_else(|| record_err(line, "reports", "expected a nonnegative integer")),
        Some(_) => Err(record_err(
            line,
            "reports",
            "expected a nonnegative integer",
        )),
        None => Err(record_err(line, "reports", "missing")),
    }
}

fn record_err(line: usize, field: &str, reason: &str) -> Error {
    Error::Record {
        line,
        field: field.to_string(),
        reason: reason.to_string(),
    }
}

fn nonempty(line: usize, field: &str, s: String) -> Result<String> {
    if s.is_empty() {
        Err(record_err(line, field, "must not be empty"))
    } else {
        Ok(s)
    }
}

pub fn read_csv<R: Read>(reader: R) -> Result<Corpus> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let mut columns = [0usize; 6];
    for (slot, field) in columns.iter_mut().zip(COMMENT_FIELDS) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == field)
            .ok_or_else(|| record_err(1, field, "missing column in header"))?;
    }
    let mut comments = Vec::new();
    let mut lines = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let get = |i: usize| -> Result<&str> {
            record
                .get(columns[i])
                .ok_or_else(|| record_err(line, COMMENT_FIELDS[i], "missing"))
        };
        let created_at =
            parse_timestamp(get(3)?).map_err(|r| record_err(line, "created_at", &r))?;
        let reports = get(5)?
            .trim()
            .parse::<u32>()
            .map_err(|_| record_err(line, "reports", "expected a nonnegative integer"))?;
        comments.push(Comment {
            comment_id: nonempty(line, "comment_id", get(0)?.to_string())?,
            user_id: nonempty(line, "user_id", get(1)?.to_string())?,
            article_id: nonempty(line, "article_id", get(2)?.to_string())?,
            created_at,
            text: get(4)?.to_string(),
            reports,
        });
        lines.push(line);
    }
    corpus_with_lines(comments, &lines)
}

pub fn write_jsonl(path: impl AsRef<Path>, comments: &[Comment]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for c in comments {
        out.push_str(&c.to_json_line());
        out.push('\n');
    }
    write_file(path, out.as_bytes())
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    Benign,
    Troll,
    Spammer,
    Fanatic,
}

impl Role {
    pub const ALL: [Role; 4] = [Role::Benign, Role::Troll, Role::Spammer, Role::Fanatic];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_misbehaving(self) -> bool {
        self != Role::Benign
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Benign => "benign",
            Role::Troll => "troll",
            Role::Spammer => "spammer",
            Role::Fanatic => "fanatic",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "benign" => Ok(Role::Benign),
            "troll" => Ok(Role::Troll),
            "spammer" => Ok(Role::Spammer),
            "fanatic" => Ok(Role::Fanatic),
            other => Err(Error::Config(format!("unknown role `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    MajorityVote,
    Manual,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoleLabel {
    pub user_id: String,
    pub role: Role,
    pub provenance: Provenance,
}

/// Reads a `user_id,role` CSV. Labels arriving from a file are taken as
/// majority-vote aggregates.
pub fn load_role_labels(path: impl AsRef<Path>) -> Result<Vec<RoleLabel>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let mut labels = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let user = record
            .get(0)
            .ok_or_else(|| record_err(line, "user_id", "missing"))?;
        let role = record
            .get(1)
            .ok_or_else(|| record_err(line, "role", "missing"))?;
        labels.push(RoleLabel {
            user_id: user.to_string(),
            role: role.parse().map_err(|_| {
                record_err(line, "role", "expected troll, spammer, fanatic or benign")
            })?,
            provenance: Provenance::MajorityVote,
        });
    }
    Ok(labels)
}

pub fn save_role_labels(path: impl AsRef<Path>, labels: &[RoleLabel]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(["user_id", "role"])?;
    for l in labels {
        wtr.write_record([l.user_id.as_str(), l.role.as_str()])?;
    }
    let bytes = wtr.into_inner().map_err(|e| Error::Matrix(e.to_string()))?;
    write_file(path.as_ref(), &bytes)
}

/// Users × named features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    users: Vec<String>,
    names: Vec<String>,
    values: Array2<f64>,
}

impl FeatureMatrix {
    pub fn new(users: Vec<String>, names: Vec<String>, values: Array2<f64>) -> Result<Self> {
        if values.nrows() != users.len() || values.ncols() != names.len() {
            return Err(Error::Matrix(format!(
                "{}x{} values for {} users and {} feature names",
                values.nrows(),
                values.ncols(),
                users.len(),
                names.len()
            )));
        }
        Ok(FeatureMatrix {
            users,
            names,
            values,
        })
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn nrows(&self) -> usize {
        self.users.len()
    }

    pub fn ncols(&self) -> usize {
        self.names.len()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.row(i)
    }

    pub fn user_row(&self, user: &str) -> Option<usize> {
        self.users.iter().position(|u| u == user)
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Rows for the given users, in the given order.
    pub fn select_users(&self, users: &[String]) -> Result<FeatureMatrix> {
        let index: HashMap<&str, usize> = self
            .users
            .iter()
            .enumerate()
            .map(|(i, u)| (u.as_str(), i))
            .collect();
        let rows = users
            .iter()
            .map(|u| {
                index
                    .get(u.as_str())
                    .copied()
                    .ok_or_else(|| Error::UnknownUser(u.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        let values = self.values.select(ndarray::Axis(0), &rows);
        FeatureMatrix::new(users.to_vec(), self.names.clone(), values)
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let mut header = Vec::with_capacity(self.names.len() + 1);
        header.push("user_id".to_string());
        header.extend(self.names.iter().cloned());
        wtr.write_record(&header)?;
        for (user, row) in self.users.iter().zip(self.values.rows()) {
            let mut rec = Vec::with_capacity(row.len() + 1);
            rec.push(user.clone());
            rec.extend(row.iter().map(|v| v.to_string()));
            wtr.write_record(&rec)?;
        }
        wtr.into_inner().map_err(|e| Error::Matrix(e.to_string()))
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<FeatureMatrix> {
        let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
        let header = rdr.headers()?.clone();
        if header.get(0) != Some("user_id") {
            return Err(Error::Matrix(
                "first header column must be `user_id`".into(),
            ));
        }
        let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut users = Vec::new();
        let mut flat = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != names.len() + 1 {
                return Err(Error::Matrix(format!(
                    "line {line}: {} columns but the header names {} features",
                    record.len().saturating_sub(1),
                    names.len()
                )));
            }
            users.push(record[0].to_string());
            for (j, cell) in record.iter().skip(1).enumerate() {
                let v: f64 = cell.parse().map_err(|_| {
                    Error::Matrix(format!("line {line}: `{}` is not a number", names[j]))
                })?;
                if !v.is_finite() {
                    return Err(Error::NonFinite);
                }
                flat.push(v);
            }
        }
        let values = Array2::from_shape_vec((users.len(), names.len()), flat)
            .map_err(|e| Error::Matrix(e.to_string()))?;
        FeatureMatrix::new(users, names, values)
    }
}

pub fn save_matrix(matrix: &FeatureMatrix, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &matrix.to_csv_bytes()?)
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    FeatureMatrix::from_csv_reader(BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn record(id: &str, user: &str, article: &str, at: &str) -> String {
        format!(
            r#"{{"comment_id":"{id}","user_id":"{user}","article_id":"{article}","created_at":"{at}","text":"hi","reports":0}}"#
        )
    }

    #[test]
    fn three_records_build_user_index() {
        let input = [
            record("c1", "u1", "a1", "2017-01-01T10:00:00Z"),
            record("c2", "u2", "a1", "2017-01-01T09:00:00Z"),
            record("c3", "u1", "a2", "2017-01-01T08:00:00Z"),
        ]
        .join("\n");
        let corpus = read_jsonl(input.as_bytes()).unwrap();
        assert_eq!(corpus.len(), 3);
        assert_eq!(corpus.num_users(), 2);
        let ids: Vec<_> = corpus
            .user_comments("u1")
            .map(|c| c.comment_id.as_str())
            .collect();
        assert_eq!(ids, ["c3", "c1"]);
        assert!(corpus.indices_consistent());
    }

    #[test]
    fn empty_input_is_empty_corpus() {
        let corpus = read_jsonl("".as_bytes()).unwrap();
        assert!(corpus.is_empty());
        assert_eq!(corpus.num_users(), 0);
    }

    #[test]
    fn missing_created_at_names_line_and_field() {
        let input = format!(
            "{}\n{}",
            record("c1", "u1", "a1", "2017-01-01T10:00:00Z"),
            r#"{"comment_id":"c2","user_id":"u1","article_id":"a1","text":"x","reports":1}"#
        );
        match read_jsonl(input.as_bytes()) {
            Err(Error::Record { line, field, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(field, "created_at");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_ids_report_both_lines() {
        let input = [
            record("c1", "u1", "a1", "2017-01-01T10:00:00Z"),
            record("c2", "u1", "a1", "2017-01-01T10:00:00Z"),
            record("c1", "u2", "a1", "2017-01-01T11:00:00Z"),
        ]
        .join("\n");
        match read_jsonl(input.as_bytes()) {
            Err(Error::DuplicateId { id, first, second }) => {
                assert_eq!((id.as_str(), first, second), ("c1", 1, 3));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_reports_rejected() {
        let line = r#"{"comment_id":"c","user_id":"u","article_id":"a","created_at":"2017-01-01T00:00:00Z","text":"","reports":-1}"#;
        assert!(matches!(
            read_jsonl(line.as_bytes()),
            Err(Error::Record { field, .. }) if field == "reports"
        ));
    }

    #[test]
    fn csv_ingest_matches_jsonl() {
        let csv_text = "comment_id,user_id,article_id,created_at,text,reports\n\
                        c1,u1,a1,2017-01-01T10:00:00Z,\"Hello, world.\",2\n\
                        c2,u2,a1,2017-01-01T11:00:00Z,yo,0\n";
        let corpus = read_csv(csv_text.as_bytes()).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.comments()[0].text, "Hello, world.");
        assert_eq!(corpus.comments()[0].reports, 2);

        let bad = "comment_id,user_id,article_id,created_at,text,reports\nc1,u1,a1,nope,x,0\n";
        assert!(matches!(
            read_csv(bad.as_bytes()),
            Err(Error::Record { line: 2, field, .. }) if field == "created_at"
        ));
    }

    #[test]
    fn ties_in_time_broken_by_comment_id() {
        let input = [
            record("b", "u1", "a1", "2017-01-01T10:00:00Z"),
            record("a", "u1", "a2", "2017-01-01T10:00:00Z"),
        ]
        .join("\n");
        let corpus = read_jsonl(input.as_bytes()).unwrap();
        let ids: Vec<_> = corpus
            .user_comments("u1")
            .map(|c| c.comment_id.as_str())
            .collect();
        assert_eq!(ids, ["a", "b"]);
    }

    #[test]
    fn matrix_round_trip_is_bit_exact() {
        let m = FeatureMatrix::new(
            vec!["u1".into(), "u2".into()],
            vec!["f1".into(), "f2".into(), "f3".into()],
            array![[0.1, 1.0 / 3.0, -2.5e-300], [1e17, 0.0, 7.125]],
        )
        .unwrap();
        let bytes = m.to_csv_bytes().unwrap();
        let back = FeatureMatrix::from_csv_reader(bytes.as_slice()).unwrap();
        assert_eq!(back.names(), m.names());
        assert_eq!(back.users(), m.users());
        for (a, b) in back.values().iter().zip(m.values().iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn header_with_extra_name_rejected() {
        let text = "user_id,a,b,c,d\nu1,1,2,3\n";
        assert!(matches!(
            FeatureMatrix::from_csv_reader(text.as_bytes()),
            Err(Error::Matrix(_))
        ));
    }

    #[test]
    fn nan_rejected_at_save() {
        let m = FeatureMatrix::new(vec!["u".into()], vec!["f".into()], array![[f64::NAN]]).unwrap();
        assert!(matches!(m.to_csv_bytes(), Err(Error::NonFinite)));
    }

    #[test]
    fn role_parsing() {
        assert_eq!("Troll".parse::<Role>().unwrap(), Role::Troll);
        assert!("moderator".parse::<Role>().is_err());
    }
}
