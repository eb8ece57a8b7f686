use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use trollspot::config::PipelineConfig;
use trollspot::pipeline::{self, Command};

#[derive(Parser)]
#[command(
    name = "trollspot",
    version,
    about = "Detect misbehaving users in news comment corpora"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Pipeline configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and validate the corpus, write a summary.
    Ingest(Common),
    /// Extract the per-user feature matrix.
    Features(Common),
    /// Write distribution and census exports.
    Stats(Common),
    /// Cross-validated classification and corpus-wide scoring.
    Experiment(Common),
    /// Sparse co-clustering and classification on memberships.
    Cocluster(Common),
    /// Generate a synthetic labeled corpus.
    Synth(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Cmd::Ingest(c) => (Command::Ingest, c),
        Cmd::Features(c) => (Command::Features, c),
        Cmd::Stats(c) => (Command::Stats, c),
        Cmd::Experiment(c) => (Command::Experiment, c),
        Cmd::Cocluster(c) => (Command::Cocluster, c),
        Cmd::Synth(c) => (Command::Synth, c),
    };
    let result = PipelineConfig::load(&common.config, common.seed).and_then(|mut cfg| {
        if let Some(out) = common.out {
            cfg.out = out;
        }
        pipeline::run(command, &cfg)
    });
    match result {
        Ok(summary) => {
            for path in &summary.outputs {
                println!("wrote {}", path.display());
            }
            for note in &summary.notices {
                eprintln!("note: {note}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("trollspot {command}: {e}");
            ExitCode::from(if e.is_validation() { 1 } else { 2 })
        }
    }
}
