//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use chrono::{TimeZone, Utc};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trollspot::cocluster::{self, CoclusterConfig};
use trollspot::config::PipelineConfig;
use trollspot::data::{self, Comment, FeatureMatrix};
use trollspot::engagement::derive_engagements;
use trollspot::features::{Dimension, FeatureRegistry, FEATURE_COUNT};
use trollspot::learn::auc;
use trollspot::pipeline::{self, Command, Workspace};
use trollspot::social::CollaborationGraph;
use trollspot::synth::planted_blocks;
use trollspot::temporal::{highly_active_hours, HourProfile};
use trollspot::Corpus;

const SEED: u64 = 20180101;

const GRAPH_TIME_LIMIT: Duration = Duration::from_secs(10);
const AUC_TOLERANCE: f64 = 1e-12;
const JACCARD_MIN: f64 = 0.9;
const TRACE_SLACK: f64 = 1e-9;
const COCLUSTER_TIME_LIMIT: Duration = Duration::from_secs(30);
const BINARY_AUC_MIN: f64 = 0.90;
const ROLE_ACCURACY_MIN: f64 = 0.75;
const PIPELINE_TIME_LIMIT: Duration = Duration::from_secs(300);
const LATENT_AUC_MIN: f64 = 0.70;
const LATENT_MARGIN_MIN: f64 = 0.15;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn graph_oracle() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut mismatches = 0;
    for g in 0..200u64 {
        let n = rng.gen_range(1..=12);
        let p = [0.2, 0.5, 0.8][(g % 3) as usize];
        let adj = common::random_adjacency(n, p, SEED ^ g);
        let graph = common::graph_from_adjacency(&adj);
        let tri = common::brute_triangles(&adj);
        let cliques = common::brute_maximal_cliques(&adj);
        let counts = graph.maximal_clique_counts(u64::MAX).expect("no budget");
        for v in 0..n {
            let name = common::node_name(v);
            let got_cliques = graph
                .nodes()
                .iter()
                .position(|x| *x == name)
                .map_or(0, |i| counts[i]);
            if graph.triangles(&name) != tri[v] || got_cliques != cliques[v] {
                mismatches += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        mismatches == 0 && elapsed < GRAPH_TIME_LIMIT,
        format!(
            "200 graphs, {mismatches} node mismatches, {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn auc_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut worst: f64 = 0.0;
    let mut sets = 0;
    while sets < 100 {
        let n = rng.gen_range(2..=50);
        // Coarse scores so that ties occur.
        let scores: Vec<f64> = (0..n)
            .map(|_| f64::from(rng.gen_range(0..8)) / 4.0)
            .collect();
        let labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
        if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
            continue;
        }
        let got = auc(&scores, &labels).unwrap();
        worst = worst.max((got - common::brute_auc(&scores, &labels)).abs());
        sets += 1;
    }
    let labels = [false, true, false, true, true];
    let perfect = auc(&[0.1, 0.9, 0.2, 0.8, 0.7], &labels).unwrap();
    let constant = auc(&[0.3; 5], &labels).unwrap();
    verdict(
        worst <= AUC_TOLERANCE && perfect == 1.0 && constant == 0.5,
        format!("max deviation {worst:e}, perfect {perfect}, constant {constant}"),
    )
}

fn cocluster_recovery() -> Verdict {
    let start = Instant::now();
    let (x, planted) = planted_blocks(40, 30, 3, 12, 10, 0.01, SEED).unwrap();
    let config = CoclusterConfig {
        rank: 3,
        lambda: 0.5,
        seed: SEED,
        ..Default::default()
    };
    let model = cocluster::fit(&x, &config).unwrap();
    let (score, _) = common::best_matching(3, 3, |p, f| {
        let rows = common::jaccard(&planted[p].0, &model.members(f));
        let cols = common::jaccard(&planted[p].1, &model.active_features(f));
        rows.min(cols)
    });
    let selection = cocluster::select_rank(&x, &config, 6).unwrap();
    let mut monotone = true;
    let mut check = |trace: &[f64]| {
        monotone &= trace
            .windows(2)
            .all(|w| w[1] <= w[0] + TRACE_SLACK * w[0].abs().max(1.0));
    };
    check(&model.objective_trace);
    check(&selection.model.objective_trace);
    for rank in 1..=6 {
        let m = cocluster::fit(
            &x,
            &CoclusterConfig {
                rank,
                ..config.clone()
            },
        )
        .unwrap();
        check(&m.objective_trace);
    }
    let elapsed = start.elapsed();
    verdict(
        score >= JACCARD_MIN && selection.rank == 3 && monotone && elapsed < COCLUSTER_TIME_LIMIT,
        format!(
            "worst-side Jaccard {score:.3}, selected rank {} (tried {:?}), trace monotone {monotone}, {:.2}s",
            selection.rank,
            selection.tried,
            elapsed.as_secs_f64()
        ),
    )
}

fn synthetic_config(out: &Path) -> PipelineConfig {
    let mut cfg = PipelineConfig::with_defaults(
        SEED,
        Some(out.join("synth/corpus.jsonl")),
        out.to_path_buf(),
    );
    cfg.labels = Some(out.join("synth/roles.csv"));
    cfg.site = Some("synthetic".into());
    cfg
}

fn end_to_end(ws: &Workspace, setup: Duration) -> (Verdict, Verdict) {
    let start = Instant::now();
    let experiment = ws.experiment();
    let elapsed = setup + start.elapsed();
    let first = match experiment {
        Ok(outcome) => {
            let auc = outcome.reference.auc.unwrap_or(0.0);
            let accuracy = outcome.roles.as_ref().map_or(0.0, |r| r.accuracy);
            verdict(
                auc >= BINARY_AUC_MIN
                    && accuracy >= ROLE_ACCURACY_MIN
                    && elapsed < PIPELINE_TIME_LIMIT,
                format!(
                    "{} users, binary AUC {auc:.3}, 4-class accuracy {accuracy:.3}, {:.1}s",
                    ws.corpus.num_users(),
                    elapsed.as_secs_f64()
                ),
            )
        }
        Err(e) => verdict(false, format!("experiment failed: {e}")),
    };

    let start = Instant::now();
    let second = match ws.cocluster() {
        Ok(outcome) => {
            let auc = outcome
                .latent_eval
                .as_ref()
                .and_then(|r| r.auc)
                .unwrap_or(0.0);
            let elapsed = setup + start.elapsed();
            verdict(
                auc >= LATENT_AUC_MIN
                    && auc - 0.5 >= LATENT_MARGIN_MIN
                    && elapsed < PIPELINE_TIME_LIMIT,
                format!(
                    "rank {}, SVM-on-A AUC {auc:.3}, {:.1}s",
                    outcome.report.rank,
                    elapsed.as_secs_f64()
                ),
            )
        }
        Err(e) => verdict(false, format!("co-clustering failed: {e}")),
    };
    (first, second)
}

fn feature_registry(ws: &Workspace, out: &Path) -> Verdict {
    let cfg = synthetic_config(out);
    if let Err(e) = pipeline::run(Command::Features, &cfg) {
        return verdict(false, format!("features failed: {e}"));
    }
    let matrix = data::load_matrix(out.join("features.csv")).unwrap();
    let registry = FeatureRegistry::new(&cfg.features.k_grid).unwrap();
    let split: Vec<usize> = Dimension::ALL.iter().map(|&d| registry.count(d)).collect();
    let names_match = matrix.names() == registry.names() && registry.check_matrix(&matrix).is_ok();
    let short = FeatureMatrix::new(
        vec!["u".into()],
        registry.names()[..72].to_vec(),
        Array2::zeros((1, 72)),
    )
    .unwrap();
    let rejects = registry.check_matrix(&short).is_err();
    verdict(
        matrix.ncols() == FEATURE_COUNT
            && split == [7, 17, 25, 24]
            && names_match
            && rejects
            && ws.features == matrix,
        format!(
            "{} columns, split {split:?}, short matrix rejected {rejects}",
            matrix.ncols()
        ),
    )
}

fn spot_checks() -> Verdict {
    let t = Utc.with_ymd_and_hms(2017, 3, 1, 12, 0, 0).unwrap();
    let corpus = Corpus::new(vec![Comment {
        comment_id: "c1".into(),
        user_id: "u1".into(),
        article_id: "a1".into(),
        created_at: t,
        text: "hello".into(),
        reports: 0,
    }])
    .unwrap();
    let duration = derive_engagements(&corpus)[0].duration();
    let uniform = highly_active_hours(&HourProfile { counts: [1; 24] });
    let mut two = [0; 24];
    two[3] = 1;
    two[17] = 1;
    let half_half = highly_active_hours(&HourProfile { counts: two });
    let names = ["a", "b", "c", "d"];
    let mut edges = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            edges.push((names[i], names[j], 1));
        }
    }
    let k4 = CollaborationGraph::from_edges(2, 0, edges);
    let tri = k4.triangles("a");
    let cliques = k4.maximal_cliques("a").unwrap();
    verdict(
        duration == 0 && uniform == 13 && tri == 3 && cliques == 1 && half_half == 2,
        format!(
            "duration {duration}, uniform {uniform}h, K4 triangles {tri} cliques {cliques}, (0.5,0.5) {half_half}h"
        ),
    )
}

fn full_pipeline(out: &Path) -> Result<(), String> {
    let cfg = synthetic_config(out);
    for command in [
        Command::Synth,
        Command::Ingest,
        Command::Features,
        Command::Stats,
        Command::Experiment,
        Command::Cocluster,
    ] {
        pipeline::run(command, &cfg).map_err(|e| format!("{command}: {e}"))?;
    }
    Ok(())
}

fn determinism(first: &Path) -> Verdict {
    let second = tempfile::tempdir().unwrap();
    if let Err(e) = full_pipeline(second.path()) {
        return verdict(false, e);
    }
    let a = common::hash_tree(first);
    let b = common::hash_tree(second.path());
    let differing: Vec<&String> = a.keys().filter(|k| a.get(*k) != b.get(*k)).collect();
    verdict(
        a == b,
        format!(
            "{} files, {} differ {:?}",
            a.len(),
            differing.len() + b.len().abs_diff(a.len()),
            differing
        ),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Verdict)> = Vec::new();
    let mut report = |id, name, v: Verdict| {
        println!(
            "[{}] {id}. {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        results.push((id, name, v));
    };

    report(1, "graph oracle equivalence", graph_oracle());
    report(2, "AUC oracle equivalence", auc_oracle());
    report(3, "co-cluster recovery", cocluster_recovery());

    let dir = tempfile::tempdir().unwrap();
    let setup_start = Instant::now();
    let setup = full_pipeline(dir.path())
        .and_then(|_| Workspace::load(&synthetic_config(dir.path())).map_err(|e| e.to_string()));
    let setup_time = setup_start.elapsed();
    match setup {
        Ok(ws) => {
            let (e2e, latent) = end_to_end(&ws, setup_time);
            report(4, "end-to-end synthetic classification", e2e);
            report(5, "latent-feature classification", latent);
            report(6, "feature registry", feature_registry(&ws, dir.path()));
            report(7, "definitional spot checks", spot_checks());
            report(8, "determinism", determinism(dir.path()));
        }
        Err(e) => {
            let detail = format!("synthetic pipeline failed: {e}");
            report(
                4,
                "end-to-end synthetic classification",
                verdict(false, detail.clone()),
            );
            report(
                5,
                "latent-feature classification",
                verdict(false, detail.clone()),
            );
            report(6, "feature registry", verdict(false, detail.clone()));
            report(7, "definitional spot checks", spot_checks());
            report(8, "determinism", verdict(false, detail));
        }
    }
    println!(
        "synthetic pipeline setup took {:.1}s",
        setup_time.as_secs_f64()
    );

    let failed = results.iter().filter(|r| !r.2.pass).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
