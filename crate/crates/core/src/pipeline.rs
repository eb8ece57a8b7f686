//! End-to-end commands: each reads the configured corpus, runs one stage and
//! writes its outputs under the configured output directory.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::cdf::CdfTable;
use crate::cocluster::{self, ClusterReport, CoclusterModel, RankSelection};
use crate::config::PipelineConfig;
use crate::data::{self, write_file, Corpus, FeatureMatrix, Role};
use crate::engagement::{derive_engagements, engagement_cdf_export, intensity_report_correlation};
use crate::error::{Error, Result};
use crate::features::extract_features;
use crate::groundtruth::{
    build_dataset, census_csv, group_census, reported_comments, LabeledDataset,
};
use crate::learn::{
    cross_validate, score_corpus, EvalReport, ModelConfig, ScoreReport, TrainingSet,
};
use crate::linguistic::length_cdf_export;
use crate::social::{graph_cdf_export, CollaborationWeights};
use crate::synth;
use crate::temporal::{heatmap_csv, heatmap_export, highly_active_hours, HourProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Ingest,
    Features,
    Stats,
    Experiment,
    Cocluster,
    Synth,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Ingest,
        Command::Features,
        Command::Stats,
        Command::Experiment,
        Command::Cocluster,
        Command::Synth,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::Features => "features",
            Command::Stats => "stats",
            Command::Experiment => "experiment",
            Command::Cocluster => "cocluster",
            Command::Synth => "synth",
        }
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown command `{s}`")))
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// What a command wrote, plus anything it skipped.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSummary {
    pub outputs: Vec<PathBuf>,
    pub notices: Vec<String>,
}

impl RunSummary {
    fn write(&mut self, path: PathBuf, bytes: &[u8]) -> Result<()> {
        write_file(&path, bytes)?;
        self.outputs.push(path);
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, path: PathBuf, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(path, text.as_bytes())
    }
}

pub fn run(command: Command, cfg: &PipelineConfig) -> Result<RunSummary> {
    match command {
        Command::Ingest => cmd_ingest(cfg),
        Command::Features => cmd_features(cfg),
        Command::Stats => cmd_stats(cfg),
        Command::Experiment => cmd_experiment(cfg),
        Command::Cocluster => cmd_cocluster(cfg),
        Command::Synth => cmd_synth(cfg),
    }
}

pub fn load_corpus(cfg: &PipelineConfig) -> Result<Corpus> {
    let corpus = data::ingest_corpus(cfg.require_input()?, cfg.format)?;
    Ok(match &cfg.site {
        Some(site) => corpus.with_site(site.clone()),
        None => corpus,
    })
}

pub fn load_roles(cfg: &PipelineConfig) -> Result<Option<BTreeMap<String, Role>>> {
    let Some(path) = &cfg.labels else {
        return Ok(None);
    };
    let labels = data::load_role_labels(path)?;
    Ok(Some(
        labels.into_iter().map(|l| (l.user_id, l.role)).collect(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestSummary {
    pub site: Option<String>,
    pub comments: usize,
    pub users: usize,
    pub articles: usize,
    pub engagements: usize,
    pub first_comment: Option<String>,
    pub last_comment: Option<String>,
}

pub fn ingest_summary(corpus: &Corpus) -> IngestSummary {
    IngestSummary {
        site: corpus.source_site.clone(),
        comments: corpus.len(),
        users: corpus.num_users(),
        articles: corpus.num_articles(),
        engagements: derive_engagements(corpus).len(),
        first_comment: corpus
            .comments()
            .first()
            .map(|c| data::format_timestamp(&c.created_at)),
        last_comment: corpus
            .comments()
            .last()
            .map(|c| data::format_timestamp(&c.created_at)),
    }
}

pub fn cmd_ingest(cfg: &PipelineConfig) -> Result<RunSummary> {
    let corpus = load_corpus(cfg)?;
    let mut run = RunSummary::default();
    run.write_json(cfg.out.join("ingest.json"), &ingest_summary(&corpus))?;
    Ok(run)
}

pub fn cmd_features(cfg: &PipelineConfig) -> Result<RunSummary> {
    let corpus = load_corpus(cfg)?;
    let features = extract_features(&corpus, &cfg.social())?;
    let mut run = RunSummary::default();
    run.write(cfg.out.join("features.csv"), &features.to_csv_bytes()?)?;
    Ok(run)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct CorrelationOutput {
    intensity_vs_reported: Option<f64>,
    undefined_reason: Option<String>,
}

pub fn cmd_stats(cfg: &PipelineConfig) -> Result<RunSummary> {
    let corpus = load_corpus(cfg)?;
    let dir = cfg.out.join("stats");
    let mut run = RunSummary::default();

    let engagements = derive_engagements(&corpus);
    run.write(
        dir.join("engagement_cdf.csv"),
        &engagement_cdf_export(&engagements).to_csv_bytes()?,
    )?;
    let correlation = match intensity_report_correlation(&engagements, &corpus, cfg.report_rule()) {
        Ok(r) => CorrelationOutput {
            intensity_vs_reported: Some(r),
            undefined_reason: None,
        },
        Err(Error::UndefinedCorrelation(why)) => {
            run.notices
                .push(format!("intensity/report correlation undefined: {why}"));
            CorrelationOutput {
                intensity_vs_reported: None,
                undefined_reason: Some(why.to_string()),
            }
        }
        Err(e) => return Err(e),
    };
    run.write_json(dir.join("correlation.json"), &correlation)?;

    let graph = CollaborationWeights::from_corpus(&corpus, cfg.features.theta).graph(0);
    run.write(
        dir.join("graph_cdf.csv"),
        &graph_cdf_export(&graph).to_csv_bytes()?,
    )?;
    run.write(dir.join("graph.edges"), graph.edge_list_text().as_bytes())?;

    run.write(
        dir.join("heatmap.csv"),
        heatmap_csv(&heatmap_export(&corpus)).as_bytes(),
    )?;
    let active: Vec<f64> = corpus
        .user_ids()
        .map(|u| {
            f64::from(highly_active_hours(&HourProfile::from_comments(
                corpus.user_comments(u),
            )))
        })
        .collect();
    let mut temporal = CdfTable::default();
    temporal.push_series("highly_active_hours", &active);
    run.write(dir.join("active_hours_cdf.csv"), &temporal.to_csv_bytes()?)?;

    run.write(
        dir.join("length_cdf.csv"),
        &length_cdf_export(&corpus).to_csv_bytes()?,
    )?;

    let reported = reported_comments(&corpus, cfg.report_rule());
    let per_user: Vec<f64> = reported.values().map(|&c| c as f64).collect();
    let mut reported_cdf = CdfTable::default();
    reported_cdf.push_series("reported_per_user", &per_user);
    run.write(dir.join("reported_cdf.csv"), &reported_cdf.to_csv_bytes()?)?;
    let census = group_census(&corpus, &cfg.groundtruth_config());
    run.write(dir.join("census.csv"), census_csv(&census).as_bytes())?;
    Ok(run)
}

/// A corpus with its feature matrix and optional role labels, shared by the
/// experiment and co-clustering stages.
#[derive(Debug, Clone)]
pub struct Workspace {
    pub cfg: PipelineConfig,
    pub corpus: Corpus,
    pub features: FeatureMatrix,
    pub roles: Option<BTreeMap<String, Role>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridEntry {
    pub ncomm: usize,
    pub auc: Option<f64>,
    pub accuracy: Option<f64>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub dataset: LabeledDataset,
    pub reference: EvalReport,
    pub grid: Vec<GridEntry>,
    pub roles: Option<EvalReport>,
    pub wild: ScoreReport,
    pub notices: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusteringReport {
    pub rank: usize,
    pub degenerate: bool,
    pub tried: Vec<(usize, usize)>,
    pub objective: f64,
    pub relative_residual: f64,
    pub clusters: Vec<ClusterReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoclusterOutcome {
    pub users: Vec<String>,
    pub feature_names: Vec<String>,
    pub selection: RankSelection,
    pub report: ClusteringReport,
    pub latent_eval: Option<EvalReport>,
    pub latent_roles: Option<EvalReport>,
    pub notices: Vec<String>,
}

const ROLE_NAMES: [&str; 4] = ["benign", "troll", "spammer", "fanatic"];

impl Workspace {
    pub fn load(cfg: &PipelineConfig) -> Result<Workspace> {
        let corpus = load_corpus(cfg)?;
        let roles = load_roles(cfg)?;
        Workspace::new(cfg.clone(), corpus, roles)
    }

    pub fn new(
        cfg: PipelineConfig,
        corpus: Corpus,
        roles: Option<BTreeMap<String, Role>>,
    ) -> Result<Workspace> {
        let features = extract_features(&corpus, &cfg.social())?;
        Ok(Workspace {
            cfg,
            corpus,
            features,
            roles,
        })
    }

    pub fn dataset(&self, ncomm: usize) -> Result<LabeledDataset> {
        build_dataset(&self.corpus, ncomm, &self.cfg.groundtruth_config())
    }

    fn binary_eval(
        &self,
        matrix: &FeatureMatrix,
        labels: Vec<usize>,
        model: &ModelConfig,
        task: &str,
    ) -> Result<EvalReport> {
        let data = TrainingSet::from_matrix(matrix, labels, 2)?;
        Ok(
            cross_validate(&data, model, self.cfg.classifier.folds, self.cfg.cv_seed())?
                .with_labels(task, &["benign", "misbehaving"]),
        )
    }

    /// Role labels for `users`, dropping users without one.
    fn role_task(
        &self,
        matrix: &FeatureMatrix,
        model: &ModelConfig,
        task: &str,
        notices: &mut Vec<String>,
    ) -> Result<Option<EvalReport>> {
        let Some(roles) = &self.roles else {
            notices.push(format!("{task}: no role labels configured, skipped"));
            return Ok(None);
        };
        let keep: Vec<String> = matrix
            .users()
            .iter()
            .filter(|u| roles.contains_key(*u))
            .cloned()
            .collect();
        if keep.len() < matrix.nrows() {
            notices.push(format!(
                "{task}: {} users without a role label left out",
                matrix.nrows() - keep.len()
            ));
        }
        let sub = matrix.select_users(&keep)?;
        let y: Vec<usize> = keep.iter().map(|u| roles[u].index()).collect();
        let data = TrainingSet::from_matrix(&sub, y, ROLE_NAMES.len())?;
        match cross_validate(&data, model, self.cfg.classifier.folds, self.cfg.cv_seed()) {
            Ok(report) => Ok(Some(report.with_labels(task, &ROLE_NAMES))),
            Err(e @ (Error::ClassTooSmall { .. } | Error::SingleClass)) => {
                notices.push(format!("{task}: skipped, {e}"));
                Ok(None)
            }
            Err(e) => Err(e),
        }
    }

    pub fn experiment(&self) -> Result<ExperimentOutcome> {
        let cfg = &self.cfg;
        let forest = ModelConfig::Forest(cfg.forest());
        let mut notices = Vec::new();

        let reference_n = cfg.groundtruth.ncomm;
        let dataset = self.dataset(reference_n)?;
        let (users, labels) = dataset.users_and_labels();
        let matrix = self.features.select_users(&users)?;
        let reference = self.binary_eval(
            &matrix,
            labels.clone(),
            &forest,
            &format!("binary_ncomm{reference_n}"),
        )?;

        let mut grid = Vec::new();
        for &n in &cfg.groundtruth.ncomm_grid {
            if n == reference_n {
                grid.push(GridEntry {
                    ncomm: n,
                    auc: reference.auc,
                    accuracy: Some(reference.accuracy),
                    skipped: None,
                });
                continue;
            }
            match self.dataset(n) {
                Ok(ds) => {
                    let (u, y) = ds.users_and_labels();
                    let report = self.binary_eval(
                        &self.features.select_users(&u)?,
                        y,
                        &forest,
                        &format!("binary_ncomm{n}"),
                    )?;
                    grid.push(GridEntry {
                        ncomm: n,
                        auc: report.auc,
                        accuracy: Some(report.accuracy),
                        skipped: None,
                    });
                }
                Err(e @ Error::InsufficientUsers { .. }) => {
                    notices.push(format!("ncomm={n} skipped: {e}"));
                    grid.push(GridEntry {
                        ncomm: n,
                        auc: None,
                        accuracy: None,
                        skipped: Some(e.to_string()),
                    });
                }
                Err(e) => return Err(e),
            }
        }

        let roles = self.role_task(
            &matrix,
            &forest,
            &format!("roles_ncomm{reference_n}"),
            &mut notices,
        )?;

        let full = TrainingSet::from_matrix(&matrix, labels, 2)?;
        let model = forest.fit(&full)?;
        let site = cfg
            .site
            .clone()
            .or_else(|| self.corpus.source_site.clone())
            .unwrap_or_else(|| "default".to_string());
        let wild = score_corpus(&model, &self.features, cfg.classifier.confidence, &|_| {
            site.clone()
        });

        Ok(ExperimentOutcome {
            dataset,
            reference,
            grid,
            roles,
            wild,
            notices,
        })
    }

    pub fn cocluster(&self) -> Result<CoclusterOutcome> {
        let cfg = &self.cfg;
        let mut notices = Vec::new();
        let dataset = self.dataset(cfg.groundtruth.ncomm)?;
        let (users, labels) = dataset.users_and_labels();
        let matrix = self.features.select_users(&users)?;
        let x = cocluster::preprocess(matrix.values());
        let cc = cfg.cocluster();
        let selection = if cfg.cocluster.select_rank {
            cocluster::select_rank(&x, &cc, cc.rank)?
        } else {
            let model = cocluster::fit(&x, &cc)?;
            let empty = model.empty_clusters().len();
            RankSelection {
                rank: cc.rank,
                degenerate: empty > 0,
                tried: vec![(cc.rank, empty)],
                model,
            }
        };
        let model = &selection.model;
        let misbehaving: Vec<bool> = labels.iter().map(|&y| y == 1).collect();
        let report = ClusteringReport {
            rank: selection.rank,
            degenerate: selection.degenerate,
            tried: selection.tried.clone(),
            objective: model.final_objective(),
            relative_residual: model.relative_residual(&x),
            clusters: cocluster::interpret(
                model,
                matrix.values(),
                matrix.names(),
                Some(&misbehaving),
                cfg.cocluster.top_features,
            ),
        };

        let (latent_eval, latent_roles) = if model.all_empty() {
            notices.push("every cluster is empty; latent classification skipped".to_string());
            (None, None)
        } else {
            let latent = cocluster::latent_feature_matrix(model, &users)?;
            let svm = ModelConfig::Svm(cfg.svm());
            let eval = self.binary_eval(&latent, labels, &svm, "latent_binary")?;
            let roles = self.role_task(&latent, &svm, "latent_roles", &mut notices)?;
            (Some(eval), roles)
        };

        Ok(CoclusterOutcome {
            users,
            feature_names: matrix.names().to_vec(),
            selection,
            report,
            latent_eval,
            latent_roles,
            notices,
        })
    }
}

pub fn cmd_experiment(cfg: &PipelineConfig) -> Result<RunSummary> {
    let ws = Workspace::load(cfg)?;
    let outcome = ws.experiment()?;
    let dir = cfg.out.join("experiment");
    let mut run = RunSummary::default();
    outcome.dataset.save(
        &ws.features,
        dir.join(format!("dataset_ncomm{}.csv", outcome.dataset.ncomm)),
    )?;
    run.outputs
        .push(dir.join(format!("dataset_ncomm{}.csv", outcome.dataset.ncomm)));
    run.write_json(dir.join("binary.json"), &outcome.reference)?;
    run.write_json(dir.join("grid.json"), &outcome.grid)?;
    if let Some(roles) = &outcome.roles {
        run.write_json(dir.join("roles.json"), roles)?;
    }
    run.write_json(dir.join("wild.json"), &outcome.wild)?;

    let mut summary = outcome.reference.summary();
    summary.push('\n');
    if let Some(roles) = &outcome.roles {
        summary.push_str(&roles.summary());
        summary.push('\n');
    }
    summary.push_str("ncomm  auc    accuracy\n");
    for g in &outcome.grid {
        match (g.auc, g.accuracy) {
            (Some(a), Some(acc)) => summary.push_str(&format!("{:<6} {a:.3}  {acc:.3}\n", g.ncomm)),
            _ => summary.push_str(&format!("{:<6} skipped\n", g.ncomm)),
        }
    }
    summary.push_str(&format!(
        "\nlabeled {} of {} users at confidence {}\n",
        outcome.wild.labeled.len(),
        outcome.wild.scored_users,
        outcome.wild.confidence
    ));
    for n in &outcome.notices {
        summary.push_str(&format!("note: {n}\n"));
    }
    run.write(dir.join("summary.txt"), summary.as_bytes())?;
    run.notices = outcome.notices;
    Ok(run)
}

pub fn cmd_cocluster(cfg: &PipelineConfig) -> Result<RunSummary> {
    let ws = Workspace::load(cfg)?;
    let outcome = ws.cocluster()?;
    let dir = cfg.out.join("cocluster");
    let mut run = RunSummary::default();
    export_factors(
        &outcome.selection.model,
        &dir,
        &outcome.users,
        &outcome.feature_names,
        &mut run,
    )?;
    run.write_json(dir.join("clusters.json"), &outcome.report)?;
    if let Some(eval) = &outcome.latent_eval {
        run.write_json(dir.join("latent_eval.json"), eval)?;
    }
    if let Some(roles) = &outcome.latent_roles {
        run.write_json(dir.join("latent_roles.json"), roles)?;
    }
    run.notices = outcome.notices;
    Ok(run)
}

fn export_factors(
    model: &CoclusterModel,
    dir: &Path,
    users: &[String],
    features: &[String],
    run: &mut RunSummary,
) -> Result<()> {
    model.export(dir, users, features)?;
    run.outputs.push(dir.join("A.csv"));
    run.outputs.push(dir.join("B.csv"));
    Ok(())
}

pub fn cmd_synth(cfg: &PipelineConfig) -> Result<RunSummary> {
    let corpus = synth::generate(&cfg.synth, cfg.synth_seed())?;
    let dir = cfg.out.join("synth");
    let mut run = RunSummary::default();
    data::write_jsonl(dir.join("corpus.jsonl"), &corpus.comments)?;
    run.outputs.push(dir.join("corpus.jsonl"));
    data::save_role_labels(dir.join("roles.csv"), &corpus.labels)?;
    run.outputs.push(dir.join("roles.csv"));
    Ok(run)
}
