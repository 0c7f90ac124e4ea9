use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::{info, warn};

use super::{load_features, load_subjects};
use crate::config::PipelineConfig;
use crate::output::Outputs;
use fatigue_core::eval::{
    cross_validate, modality_importance, write_fig1_csv, write_report_json, write_table1_csv,
    EvaluationReport, ModelImportance, SplitMode,
};
use fatigue_core::features::{feature_meta, read_feature_meta, FeatureInfo, N_FEATURES};
use fatigue_core::models::Registry;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Feature table (default: <out-dir>/features.csv).
    #[arg(long, value_name = "FILE")]
    features: Option<PathBuf>,
    /// subjects.csv with age and BMI, needed by the demographic MERF models.
    #[arg(long, value_name = "FILE")]
    subjects: Option<PathBuf>,
    /// Comma-separated model names (default: linear,rf,merf_age,merf_bmi,merf_age_bmi).
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<String>>,
    /// Number of folds.
    #[arg(long)]
    k: Option<usize>,
    /// Split unit: `record` or `subject`.
    #[arg(long, value_parser = parse_split)]
    split: Option<SplitMode>,
}

fn parse_split(s: &str) -> Result<SplitMode, String> {
    match s.to_ascii_lowercase().as_str() {
        "record" | "records" => Ok(SplitMode::Record),
        "subject" | "subjects" => Ok(SplitMode::Subject),
        _ => Err(format!("unknown split `{s}` (expected record or subject)")),
    }
}

/// `feature_meta.json` beside the table, else the built-in layout if the
/// width matches.
fn load_meta(features: &Path, p: usize) -> Result<Option<Vec<FeatureInfo>>> {
    let beside = features.with_file_name("feature_meta.json");
    if beside.is_file() {
        let meta = read_feature_meta(&beside)?;
        if meta.len() == p {
            return Ok(Some(meta));
        }
        warn!(
            "{} describes {} features but the table has {p}",
            beside.display(),
            meta.len()
        );
    }
    Ok((p == N_FEATURES).then(|| feature_meta().to_vec()))
}

pub fn run(mut cfg: PipelineConfig, args: Args) -> Result<Vec<PathBuf>> {
    if let Some(m) = args.models {
        cfg.evaluate.models = m;
    }
    if let Some(k) = args.k {
        cfg.cv.k = k;
    }
    if let Some(s) = args.split {
        cfg.cv.split = s;
    }
    cfg.validate()?;
    if cfg.evaluate.models.is_empty() {
        bail!("no models to evaluate");
    }
    let registry = Registry::builtin();
    let strategies = cfg
        .evaluate
        .models
        .iter()
        .map(|name| registry.get(name))
        .collect::<Result<Vec<_>, _>>()?;

    let (features_path, data) = load_features(&cfg, args.features)?;
    let subjects = load_subjects(&cfg, args.subjects)?;
    let meta = load_meta(&features_path, data.n_features())?;
    if meta.is_none() {
        warn!("no modality metadata for this feature table; fig1.csv will be empty");
    }

    let cv = cfg.cv_settings();
    let mut reports = Vec::with_capacity(strategies.len());
    let mut shares = Vec::new();
    for s in strategies {
        info!("cross-validating {} ({}-fold, seed {})", s.name(), cv.k, cv.seed);
        let report = cross_validate(&data, s, &cfg.models, subjects.as_ref(), &cv)
            .with_context(|| format!("evaluating `{}`", s.name()))?;
        info!(
            "{}: RMSE {:.3}±{:.3}",
            report.label, report.rmse.mean, report.rmse.std
        );
        if let (Some(imp), Some(meta)) = (&report.importance, &meta) {
            shares.push(ModelImportance {
                model: report.label.clone(),
                modality: modality_importance(imp, meta, cfg.evaluate.top_k)?,
            });
        }
        reports.push(report);
    }

    let mut out = Outputs::new(&cfg.out_dir)?;
    write_report_json(out.stage("report.json"), &EvaluationReport::new(&reports, &shares))?;
    write_table1_csv(out.stage("table1.csv"), &reports)?;
    write_fig1_csv(out.stage("fig1.csv"), &shares)?;
    out.commit()
}
