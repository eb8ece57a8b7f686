//! Pipeline configuration file (TOML).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cocluster::CoclusterConfig;
use crate::data::InputFormat;
use crate::error::{Error, Result};
use crate::groundtruth::{GroundTruthConfig, ReportRule};
use crate::learn::{ForestConfig, SvmConfig};
use crate::seed;
use crate::social::{SocialConfig, DEFAULT_CLIQUE_BUDGET, DEFAULT_K_GRID, DEFAULT_THETA};
use crate::synth::SynthSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureSection {
    pub theta: u32,
    pub k_grid: Vec<u32>,
    pub clique_budget: u64,
}

impl Default for FeatureSection {
    fn default() -> Self {
        FeatureSection {
            theta: DEFAULT_THETA,
            k_grid: DEFAULT_K_GRID.to_vec(),
            clique_budget: DEFAULT_CLIQUE_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroundTruthSection {
    pub n_rep: u32,
    /// Count `reports >= n_rep` (true) or `reports > n_rep` (false).
    pub inclusive: bool,
    /// Threshold of the reference dataset.
    pub ncomm: usize,
    pub ncomm_grid: Vec<usize>,
    pub sample_size: usize,
}

impl Default for GroundTruthSection {
    fn default() -> Self {
        GroundTruthSection {
            n_rep: 3,
            inclusive: true,
            ncomm: 32,
            ncomm_grid: (0..=7).map(|i| 1usize << i).collect(),
            sample_size: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierSection {
    pub folds: usize,
    /// Probability needed to label a user in corpus-wide scoring.
    pub confidence: f64,
    pub forest: ForestConfig,
}

impl Default for ClassifierSection {
    fn default() -> Self {
        ClassifierSection {
            folds: 10,
            confidence: 0.8,
            forest: ForestConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoclusterSection {
    /// Fixed rank, or the largest rank tried when `select_rank` is set.
    pub rank: usize,
    pub select_rank: bool,
    pub lambda: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub restarts: usize,
    pub membership_threshold: Option<f64>,
    pub top_features: usize,
}

impl Default for CoclusterSection {
    fn default() -> Self {
        let c = CoclusterConfig::default();
        CoclusterSection {
            rank: c.rank,
            select_rank: true,
            lambda: c.lambda,
            max_iters: c.max_iters,
            tol: c.tol,
            restarts: c.restarts,
            membership_threshold: c.membership_threshold,
            top_features: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    input: Option<PathBuf>,
    format: InputFormat,
    site: Option<String>,
    labels: Option<PathBuf>,
    out: PathBuf,
    features: FeatureSection,
    groundtruth: GroundTruthSection,
    classifier: ClassifierSection,
    svm: SvmConfig,
    cocluster: CoclusterSection,
    synth: SynthSpec,
}

impl Default for RawConfig {
    fn default() -> Self {
        RawConfig {
            seed: None,
            input: None,
            format: InputFormat::Jsonl,
            site: None,
            labels: None,
            out: PathBuf::from("out"),
            features: FeatureSection::default(),
            groundtruth: GroundTruthSection::default(),
            classifier: ClassifierSection::default(),
            svm: SvmConfig::default(),
            cocluster: CoclusterSection::default(),
            synth: SynthSpec::default(),
        }
    }
}

/// Resolved pipeline configuration. Relative paths in the file are taken
/// relative to the file's directory.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub seed: u64,
    pub input: Option<PathBuf>,
    pub format: InputFormat,
    pub site: Option<String>,
    pub labels: Option<PathBuf>,
    pub out: PathBuf,
    pub features: FeatureSection,
    pub groundtruth: GroundTruthSection,
    pub classifier: ClassifierSection,
    pub svm: SvmConfig,
    pub cocluster: CoclusterSection,
    pub synth: SynthSpec,
}

impl PipelineConfig {
    /// Parses a config document. `seed_override` replaces the file's seed;
    /// one of the two must be present.
    pub fn from_toml(text: &str, base_dir: &Path, seed_override: Option<u64>) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let seed = seed_override
            .or(raw.seed)
            .ok_or_else(|| Error::Config("a seed is required (config `seed` or --seed)".into()))?;
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base_dir.join(p) };
        let cfg = PipelineConfig {
            seed,
            input: raw.input.map(resolve),
            format: raw.format,
            site: raw.site,
            labels: raw.labels.map(resolve),
            out: resolve(raw.out),
            features: raw.features,
            groundtruth: raw.groundtruth,
            classifier: raw.classifier,
            svm: raw.svm,
            cocluster: raw.cocluster,
            synth: raw.synth,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>, seed_override: Option<u64>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        PipelineConfig::from_toml(&text, base, seed_override)
    }

    pub fn with_defaults(seed: u64, input: Option<PathBuf>, out: PathBuf) -> Self {
        let raw = RawConfig::default();
        PipelineConfig {
            seed,
            input,
            format: raw.format,
            site: raw.site,
            labels: raw.labels,
            out,
            features: raw.features,
            groundtruth: raw.groundtruth,
            classifier: raw.classifier,
            svm: raw.svm,
            cocluster: raw.cocluster,
            synth: raw.synth,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.theta < 1 {
            return Err(Error::Config("theta must be at least 1".into()));
        }
        if self.classifier.folds < 2 {
            return Err(Error::Config("folds must be at least 2".into()));
        }
        if !(0.0..=1.0).contains(&self.classifier.confidence) {
            return Err(Error::Config("confidence must be in [0, 1]".into()));
        }
        crate::features::FeatureRegistry::new(&self.features.k_grid)?;
        self.groundtruth_config().validate()?;
        Ok(())
    }

    pub fn require_input(&self) -> Result<&Path> {
        self.input
            .as_deref()
            .ok_or_else(|| Error::Config("`input` is required for this command".into()))
    }

    pub fn social(&self) -> SocialConfig {
        SocialConfig {
            theta: self.features.theta,
            k_grid: self.features.k_grid.clone(),
            clique_budget: self.features.clique_budget,
        }
    }

    pub fn report_rule(&self) -> ReportRule {
        ReportRule {
            n_rep: self.groundtruth.n_rep,
            inclusive: self.groundtruth.inclusive,
        }
    }

    pub fn groundtruth_config(&self) -> GroundTruthConfig {
        GroundTruthConfig {
            rule: self.report_rule(),
            ncomm_grid: self.groundtruth.ncomm_grid.clone(),
            sample_size: self.groundtruth.sample_size,
            seed: seed::derive(self.seed, "groundtruth"),
        }
    }

    pub fn forest(&self) -> ForestConfig {
        ForestConfig {
            seed: seed::derive(self.seed, "forest"),
            ..self.classifier.forest.clone()
        }
    }

    pub fn svm(&self) -> SvmConfig {
        SvmConfig {
            seed: seed::derive(self.seed, "svm"),
            ..self.svm.clone()
        }
    }

    pub fn cocluster(&self) -> CoclusterConfig {
        let c = &self.cocluster;
        CoclusterConfig {
            rank: c.rank,
            lambda: c.lambda,
            max_iters: c.max_iters,
            tol: c.tol,
            restarts: c.restarts,
            membership_threshold: c.membership_threshold,
            seed: seed::derive(self.seed, "cocluster"),
        }
    }

    pub fn cv_seed(&self) -> u64 {
        seed::derive(self.seed, "cv")
    }

    pub fn synth_seed(&self) -> u64 {
        seed::derive(self.seed, "synth")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let cfg =
            PipelineConfig::from_toml("seed = 5\ninput = \"c.jsonl\"", Path::new("/data"), None)
                .unwrap();
        assert_eq!(cfg.seed, 5);
        assert_eq!(cfg.input.as_deref(), Some(Path::new("/data/c.jsonl")));
        assert_eq!(cfg.out, Path::new("/data/out"));
        assert_eq!(cfg.groundtruth.ncomm, 32);
        assert_eq!(cfg.features.k_grid, DEFAULT_K_GRID);
    }

    #[test]
    fn seed_is_mandatory() {
        assert!(matches!(
            PipelineConfig::from_toml("", Path::new("."), None),
            Err(Error::Config(_))
        ));
        assert_eq!(
            PipelineConfig::from_toml("", Path::new("."), Some(3))
                .unwrap()
                .seed,
            3
        );
        assert_eq!(
            PipelineConfig::from_toml("seed = 1", Path::new("."), Some(3))
                .unwrap()
                .seed,
            3
        );
    }

    #[test]
    fn sections_parse() {
        let text = r#"
            seed = 1
            format = "csv"
            [features]
            theta = 3
            [groundtruth]
            inclusive = false
            sample_size = 50
            [classifier.forest]
            n_trees = 10
            [cocluster]
            rank = 4
            lambda = 0.25
            [synth]
            n_benign = 10
        "#;
        let cfg = PipelineConfig::from_toml(text, Path::new("."), None).unwrap();
        assert_eq!(cfg.format, InputFormat::Csv);
        assert_eq!(cfg.features.theta, 3);
        assert!(!cfg.report_rule().inclusive);
        assert_eq!(cfg.forest().n_trees, 10);
        assert_eq!(cfg.cocluster().rank, 4);
        assert_eq!(cfg.synth.n_benign, 10);
    }

    #[test]
    fn bad_values_rejected() {
        assert!(PipelineConfig::from_toml(
            "seed = 1\n[features]\nk_grid = [0, 1]",
            Path::new("."),
            None
        )
        .is_err());
        assert!(PipelineConfig::from_toml(
            "seed = 1\n[classifier]\nconfidence = 2.0",
            Path::new("."),
            None
        )
        .is_err());
        assert!(PipelineConfig::from_toml("seed = 1\nbogus = 1", Path::new("."), None).is_err());
    }
}
