//! `fatigue`: extract features from wearable recordings, benchmark the
//! regressors with cross-validation, and fit/apply single models.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use config::PipelineConfig;

#[derive(Debug, Parser)]
#[command(name = "fatigue", version, about)]
struct Cli {
    /// Pipeline configuration (TOML). Flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Seed for every stochastic step.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Raw CSV bundle -> features.csv, feature_meta.json, extraction_log.json.
    Extract(commands::extract::Args),
    /// Cross-validate models -> report.json, table1.csv, fig1.csv.
    Evaluate(commands::evaluate::Args),
    /// Generate synthetic data.
    #[command(subcommand)]
    Synth(commands::synth::Synth),
    /// Train one model on a feature table -> model.json.
    Fit(commands::fit::Args),
    /// Apply a saved model to a feature table -> predictions.csv.
    Predict(commands::predict::Args),
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(d) = &cli.out_dir {
        cfg.out_dir = d.clone();
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli)?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let written = match cli.command {
        Command::Extract(a) => commands::extract::run(cfg, a),
        Command::Evaluate(a) => commands::evaluate::run(cfg, a),
        Command::Synth(s) => commands::synth::run(cfg, s),
        Command::Fit(a) => commands::fit::run(cfg, a),
        Command::Predict(a) => commands::predict::run(cfg, a),
    }?;
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
