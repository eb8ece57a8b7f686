use std::path::Path;
use std::process::{Command, Output};

fn trollspot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trollspot"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("trollspot.toml");
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const SMALL_SYNTH: &str = r#"
input = "out/synth/corpus.jsonl"
labels = "out/synth/roles.csv"
out = "out"

[synth]
n_benign = 120
n_troll = 12
n_spammer = 10
n_fanatic = 10
n_articles = 600
n_hot_articles = 150

[groundtruth]
sample_size = 20
ncomm_grid = [1, 32, 128]

[classifier]
folds = 5

[classifier.forest]
n_trees = 20
"#;

#[test]
fn full_run_on_small_synthetic_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL_SYNTH);
    for cmd in [
        "synth",
        "ingest",
        "features",
        "stats",
        "experiment",
        "cocluster",
    ] {
        let out = trollspot(&[cmd, "--config", &config, "--seed", "9"]);
        assert!(
            out.status.success(),
            "{cmd}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let root = dir.path().join("out");
    for file in [
        "ingest.json",
        "features.csv",
        "stats/census.csv",
        "stats/heatmap.csv",
        "experiment/binary.json",
        "experiment/roles.json",
        "experiment/summary.txt",
        "cocluster/A.csv",
        "cocluster/B.csv",
        "cocluster/clusters.json",
    ] {
        assert!(root.join(file).is_file(), "missing {file}");
    }
    let header = std::fs::read_to_string(root.join("features.csv")).unwrap();
    assert_eq!(header.lines().next().unwrap().split(',').count(), 74);
    let summary = std::fs::read_to_string(root.join("experiment/summary.txt")).unwrap();
    assert!(summary.contains("128"), "grid entry reported: {summary}");
}

#[test]
fn missing_seed_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "input = \"x.jsonl\"\n");
    let out = trollspot(&["ingest", "--config", &config]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn malformed_record_reports_line_and_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.jsonl"),
        concat!(
            r#"{"comment_id":"c1","user_id":"u1","article_id":"a1","created_at":"2017-01-01T00:00:00Z","text":"hi","reports":0}"#,
            "\n",
            r#"{"comment_id":"c2","user_id":"u1","article_id":"a1","created_at":"yesterday","text":"hi","reports":0}"#,
            "\n"
        ),
    )
    .unwrap();
    let config = write_config(dir.path(), "seed = 1\ninput = \"c.jsonl\"\n");
    let out = trollspot(&["ingest", "--config", &config]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("line 2") && err.contains("created_at"),
        "{err}"
    );
}

#[test]
fn missing_input_file_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "seed = 1\ninput = \"absent.jsonl\"\n");
    let out = trollspot(&["features", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn too_few_reported_users_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.jsonl"),
        r#"{"comment_id":"c1","user_id":"u1","article_id":"a1","created_at":"2017-01-01T00:00:00Z","text":"hi","reports":0}"#,
    )
    .unwrap();
    let config = write_config(dir.path(), "seed = 1\ninput = \"c.jsonl\"\n");
    let out = trollspot(&["experiment", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_corpus_gives_header_only_exports() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.jsonl"), "").unwrap();
    let config = write_config(dir.path(), "seed = 1\ninput = \"c.jsonl\"\n");
    let out = trollspot(&["stats", "--config", &config]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let cdf = std::fs::read_to_string(dir.path().join("out/stats/engagement_cdf.csv")).unwrap();
    assert_eq!(cdf.trim(), "series,value,cum_fraction");
}

#[test]
fn out_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.jsonl"), "").unwrap();
    let config = write_config(dir.path(), "seed = 1\ninput = \"c.jsonl\"\n");
    let target = dir.path().join("elsewhere");
    let out = trollspot(&[
        "ingest",
        "--config",
        &config,
        "--out",
        target.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(target.join("ingest.json").is_file());
}
