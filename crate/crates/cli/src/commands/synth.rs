use std::path::PathBuf;

use anyhow::{Context, Result};
use log::info;

use super::write_json;
use crate::config::PipelineConfig;
use crate::output::Outputs;
use fatigue_core::synth::{gen_clustered, gen_streams, ClusteredSpec, FixedEffect, StreamSpec};

#[derive(Debug, clap::Subcommand)]
pub enum Synth {
    /// Raw multimodal CSV bundle plus a pipeline.toml to extract it.
    Streams(StreamArgs),
    /// Clustered regression benchmark: synth_features.csv + synth_truth.json.
    Clustered(ClusteredArgs),
}

#[derive(Debug, clap::Args)]
pub struct StreamArgs {
    #[arg(long)]
    subjects: usize,
    #[arg(long)]
    days: usize,
    /// Fraction of recording time lost to device-off gaps, in [0, 1).
    #[arg(long, default_value_t = 0.0)]
    missingness: f64,
    /// Accelerometer sampling rate.
    #[arg(long, default_value_t = StreamSpec::default().accel_hz)]
    accel_hz: f64,
}

#[derive(Debug, clap::Args)]
pub struct ClusteredArgs {
    #[arg(long)]
    clusters: usize,
    #[arg(long)]
    per_cluster: usize,
    /// Standard deviation of the random intercepts.
    #[arg(long, default_value_t = ClusteredSpec::default().sigma_b)]
    sigma_b: f64,
    /// Residual standard deviation.
    #[arg(long, default_value_t = ClusteredSpec::default().sigma_e)]
    sigma_e: f64,
    /// `friedman1` or `linear`.
    #[arg(long, default_value = "friedman1")]
    fixed_effect: FixedEffect,
}

pub fn run(cfg: PipelineConfig, cmd: Synth) -> Result<Vec<PathBuf>> {
    match cmd {
        Synth::Streams(a) => streams(cfg, a),
        Synth::Clustered(a) => clustered(cfg, a),
    }
}

fn streams(cfg: PipelineConfig, a: StreamArgs) -> Result<Vec<PathBuf>> {
    let spec = StreamSpec {
        n_subjects: a.subjects,
        days: a.days,
        seed: cfg.seed,
        missingness: a.missingness,
        accel_hz: a.accel_hz,
        ..StreamSpec::default()
    };
    let mut out = Outputs::new(&cfg.out_dir)?;
    let bundle = gen_streams(&spec, out.staging_dir()).context("generating streams")?;
    for name in ["subjects.csv", "rr.csv", "accel.csv", "temp.csv", "resp.csv", "labels.csv"] {
        out.stage(name);
    }
    info!("{} subjects x {} days, {} labels", spec.n_subjects, spec.days, bundle.n_labels);

    // A config that extracts this bundle in place, with coverage rates
    // matching how it was generated.
    let mut pipeline = PipelineConfig {
        seed: cfg.seed,
        out_dir: PathBuf::from("."),
        threads: None,
        ..PipelineConfig::default()
    };
    pipeline.input.dir = PathBuf::from(".");
    pipeline.extract.features.coverage.rates.accel_hz = spec.accel_hz;
    let path = out.stage("pipeline.toml");
    let text = format!(
        "# Generated by `fatigue synth streams`. Run `fatigue --config pipeline.toml extract`.\n{}",
        pipeline.to_toml()?
    );
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    out.commit()
}

fn clustered(cfg: PipelineConfig, a: ClusteredArgs) -> Result<Vec<PathBuf>> {
    let spec = ClusteredSpec {
        n_clusters: a.clusters,
        per_cluster: a.per_cluster,
        fixed_effect: a.fixed_effect,
        sigma_b: a.sigma_b,
        sigma_e: a.sigma_e,
        seed: cfg.seed,
    };
    let data = gen_clustered(&spec).context("generating clustered benchmark")?;
    let mut out = Outputs::new(&cfg.out_dir)?;
    data.dataset.write_csv(out.stage("synth_features.csv"))?;
    write_json(&out.stage("synth_truth.json"), &data.truth)?;
    out.commit()
}
