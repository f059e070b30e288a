use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use gaitnet::data::{PlacementSelector, Protocol, Task};

mod commands;
mod settings;
mod summary;

use settings::RunConfig;

#[derive(Parser)]
#[command(name = "gaitnet", version, about = "Canine gait classification from IMU recordings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic cohort: manifest.csv plus one CSV per recording.
    Synth {
        /// TOML generator spec; defaults mirror a 17/6/6-dog cohort.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Train on a stratified random split; writes a checkpoint and a report.
    Train(CellArgs),
    /// Leave-one-dog-out evaluation; writes the aggregated report.
    Loo(CellArgs),
    /// Summarize report files into summary.txt and summary.json.
    Report {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct CellArgs {
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    task: Option<Task>,
    #[arg(long)]
    placement: Option<PlacementSelector>,
    #[arg(long)]
    protocol: Option<Protocol>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    /// Add a copy of every training window rotated about x by this many degrees.
    #[arg(long, value_name = "DEGREES")]
    augment: Option<f64>,
    /// Separate accelerometer and gyroscope conv branches.
    #[arg(long)]
    two_head: bool,
    #[arg(long)]
    out: PathBuf,
    /// `key = value` settings file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl CellArgs {
    fn run_config(&self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        Ok(file.overlay(RunConfig {
            manifest: self.manifest.clone(),
            task: self.task,
            placement: self.placement,
            protocol: self.protocol,
            seed: self.seed,
            epochs: self.epochs,
            restarts: self.restarts,
            augment: self.augment,
            two_head: self.two_head.then_some(true),
            ..RunConfig::default()
        }))
    }
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Synth { spec, seed, out, config } => {
            let file = match &config {
                Some(path) => RunConfig::load(path)?,
                None => RunConfig::default(),
            };
            commands::synth(file, spec.as_deref(), seed, &out)
        }
        Command::Train(args) => commands::train(args.run_config()?, &args.out),
        Command::Loo(args) => commands::loo(args.run_config()?, &args.out),
        Command::Report { reports, out } => commands::report(&reports, &out),
    }
}
