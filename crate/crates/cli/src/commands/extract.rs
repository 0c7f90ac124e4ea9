use std::path::PathBuf;

use anyhow::{Context, Result};

use super::write_json;
use crate::config::{require_files, PipelineConfig};
use crate::output::Outputs;
use fatigue_core::extract::extract;
use fatigue_core::features::{write_feature_meta, write_features_csv};
use fatigue_core::Modality;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Directory holding subjects.csv, rr.csv, accel.csv, temp.csv, resp.csv, labels.csv.
    #[arg(long, value_name = "DIR")]
    input: Option<PathBuf>,
}

pub fn run(mut cfg: PipelineConfig, args: Args) -> Result<Vec<PathBuf>> {
    if let Some(dir) = args.input {
        cfg.input.dir = dir;
    }
    let inputs = cfg.input_paths();
    let mut required: Vec<&std::path::Path> = Modality::ALL.iter().map(|&m| inputs.stream(m)).collect();
    required.push(&inputs.labels);
    require_files(required)?;

    let result = extract(&inputs, &cfg.extract).context("feature extraction failed")?;
    let mut out = Outputs::new(&cfg.out_dir)?;
    write_features_csv(out.stage("features.csv"), &result.points)?;
    write_feature_meta(out.stage("feature_meta.json"))?;
    write_json(&out.stage("extraction_log.json"), &result.log)?;
    out.commit()
}
