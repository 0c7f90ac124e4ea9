use std::path::PathBuf;

use anyhow::{Context, Result};
use log::info;

use super::{load_features, load_subjects};
use crate::config::PipelineConfig;
use crate::output::Outputs;
use fatigue_core::models::{FitContext, Registry, SavedDocument};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Model name, e.g. `rf` or `merf_age_bmi`.
    #[arg(long)]
    model: String,
    #[arg(long, value_name = "FILE")]
    features: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    subjects: Option<PathBuf>,
}

pub fn run(cfg: PipelineConfig, args: Args) -> Result<Vec<PathBuf>> {
    let registry = Registry::builtin();
    let strategy = registry.get(&args.model)?;
    let (_, data) = load_features(&cfg, args.features)?;
    let subjects = load_subjects(&cfg, args.subjects)?;
    let ctx = FitContext {
        settings: &cfg.models,
        subjects: subjects.as_ref(),
        seed: cfg.seed,
    };
    let model = strategy
        .fit(&data, &ctx)
        .with_context(|| format!("fitting `{}`", strategy.name()))?;
    if let Some(d) = model.mixed_diagnostics() {
        info!(
            "{}: sigma2={:.4} sigma_b2={:.4} after {} EM iterations",
            strategy.name(),
            d.sigma2,
            d.sigma_b2,
            d.iterations
        );
    }
    let doc = SavedDocument::new(strategy.name(), data.n_features(), model.as_ref());
    let mut out = Outputs::new(&cfg.out_dir)?;
    let path = out.stage("model.json");
    std::fs::write(&path, doc.to_json()?).with_context(|| format!("writing {}", path.display()))?;
    out.commit()
}
